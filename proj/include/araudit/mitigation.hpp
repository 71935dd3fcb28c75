#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "araudit/dataset.hpp"

namespace araudit {

/// Per-feature Beta(alpha_i, 0.5) with alpha_i = |0.5 - mu_i| + 0.5; features
/// whose mean exceeds 0.5 are mirrored (1 - draw).
struct BetaNoiseSpec {
    std::vector<double> mean;
    std::vector<double> alpha;
    std::vector<bool> mirrored;
    static constexpr double beta = 0.5;

    /// Throws InvalidInput when a mean lies outside [0, 1].
    static BetaNoiseSpec from_means(std::span<const double> means);
};

inline const UserId kBetaNoiseUser = "beta-noise";
inline const UserId kAuxUser = "aux";

/// `count` noise vectors, row-major. Feature i draws from its own substream
/// keyed on i, and the Beta draw depends only on alpha_i, so the noise for
/// mean 1 - mu is exactly 1 - the noise for mean mu under the same seed.
std::vector<double> beta_noise(std::span<const double> user_means, std::size_t count,
                               std::uint64_t seed);

/// Means of the positive rows of a dataset.
std::vector<double> positive_means(const LabeledDataset& dataset);

/// Adds `beta_count` beta-noise negatives (default: the positive count) built
/// around the base set's positive means, plus auxiliary negatives when given.
/// A balanced base yields thirds without aux and quarters with aux. More aux
/// vectors than positives are subsampled with `seed`; fewer is an error.
LabeledDataset augment_training_set(const LabeledDataset& base,
                                    std::optional<std::size_t> beta_count,
                                    const std::optional<LabeledDataset>& aux_negatives,
                                    std::uint64_t seed);

} // namespace araudit
