#pragma once

#include <filesystem>
#include <iosfwd>

#include "araudit/dataset.hpp"

namespace araudit {

/// Dataset interchange: header `user_id,label,f0,...,f{n-1}`, one row per
/// sample, labels written as `+1`/`-1`, reals with 17 significant digits.
void write_dataset_csv(std::ostream& out, const LabeledDataset& dataset);
void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& dataset);

LabeledDataset read_dataset_csv(std::istream& in);
LabeledDataset read_dataset_csv(const std::filesystem::path& path);

} // namespace araudit
