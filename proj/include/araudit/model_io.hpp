#pragma once

#include <filesystem>
#include <iosfwd>

#include "araudit/model.hpp"

namespace araudit {

/// Text model format, version 1: a `araudit-model 1` banner, the algorithm
/// tag, the feature count, then algorithm-specific parameter blocks. Reals
/// are written as hexadecimal floats so a reloaded model scores bit-exactly.
void save_model(std::ostream& out, const ScoringModel& model);
void save_model(const std::filesystem::path& path, const ScoringModel& model);

ScoringModel load_model(std::istream& in);
ScoringModel load_model(const std::filesystem::path& path);

} // namespace araudit
