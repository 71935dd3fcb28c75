#pragma once

#include <random>
#include <string>
#include <vector>

#include "araudit/dataset.hpp"
#include "araudit/rng.hpp"

namespace testing {

using namespace araudit;

// Random labelled dataset with `users` users; user 0 is positive.
inline LabeledDataset random_dataset(std::uint64_t seed, std::size_t rows, std::size_t n,
                                     std::size_t users = 4) {
    Rng rng(seed);
    LabeledDataset ds(n);
    std::vector<double> x(n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (double& v : x) v = uniform01(rng) * 3.0 - 1.0;
        const std::size_t u = r % users;
        ds.add(x, u == 0 ? Label::Positive : Label::Negative, "u" + std::to_string(u));
    }
    return ds;
}

// Two Gaussian blobs in [0,1]^n, positives around 0.35, negatives around 0.65.
inline LabeledDataset blobs(std::uint64_t seed, std::size_t per_class, std::size_t n,
                            double sd = 0.08) {
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    LabeledDataset ds(n);
    std::vector<double> x(n);
    for (Label l : {Label::Positive, Label::Negative}) {
        const double c = l == Label::Positive ? 0.35 : 0.65;
        for (std::size_t k = 0; k < per_class; ++k) {
            for (double& v : x) v = std::clamp(c + sd * z(rng), 0.0, 1.0);
            ds.add(x, l, l == Label::Positive ? "pos" : "neg");
        }
    }
    return ds;
}

// Multiset of rows as sortable tuples (values then user).
inline std::vector<std::pair<std::vector<double>, std::string>> rows_of(const LabeledDataset& ds) {
    std::vector<std::pair<std::vector<double>, std::string>> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto r = ds.row(i);
        out.emplace_back(std::vector<double>(r.begin(), r.end()), ds.user(i));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace testing
