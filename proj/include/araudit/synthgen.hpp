#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "araudit/dataset.hpp"

namespace araudit {

/// Every non-isolated user has the same per-feature standard deviation.
struct FixedSd {
    double sd = 0.2;
    friend bool operator==(const FixedSd&, const FixedSd&) = default;
};

/// Per-user standard deviations drawn hierarchically: a per-feature centre
/// c_i ~ N(center_mean, center_sd^2), a per-feature spread
/// s_i ~ N(spread_mean, spread_sd^2), then sigma_{u,i} ~ N(c_i, s_i^2).
/// Negative draws clamp to zero at every level.
struct SampledSd {
    double center_mean = 0.2;
    double center_sd = 0.05;
    double spread_mean = 0.03;
    double spread_sd = 0.02;
    friend bool operator==(const SampledSd&, const SampledSd&) = default;
};

using UserSdPolicy = std::variant<FixedSd, SampledSd>;

/// One user whose standard deviation is pinned regardless of the policy.
struct IsolatedUser {
    std::size_t index = 0;
    double sd = 0.2;
    friend bool operator==(const IsolatedUser&, const IsolatedUser&) = default;
};

struct PopulationSpec {
    std::size_t user_count = 50;
    std::size_t feature_count = 50;
    double mean_of_means = 0.5;
    double sd_of_means = 0.1;
    double mean_of_sds = 0.1;
    double sd_of_sds = 0.07;
    std::size_t samples_per_user = 200;
    UserSdPolicy user_sd = FixedSd{};
    std::optional<IsolatedUser> isolated;

    /// Throws InvalidInput when a field is out of range.
    void validate() const;

    friend bool operator==(const PopulationSpec&, const PopulationSpec&) = default;
};

/// Population-level distribution of each feature's user means (mean, spread),
/// plus the per-feature SD centre/spread when the policy is SampledSd.
struct FeatureDistribution {
    std::vector<double> mean;
    std::vector<double> spread;
    std::vector<double> sd_center;
    std::vector<double> sd_spread;
};

struct UserProfile {
    std::vector<double> mean;
    std::vector<double> sd;
};

/// Zero-padded id used for generated user `index`.
std::string synthetic_user_id(std::size_t index);

FeatureDistribution sample_feature_distributions(const PopulationSpec& spec, std::uint64_t seed);

/// Draws the profile of user `index`. Uses only the substream keyed on the
/// user index, so it is independent of other users.
UserProfile sample_user_profile(const PopulationSpec& spec, const FeatureDistribution& dist,
                                std::size_t index, std::uint64_t seed);

/// Raw (unclipped) per-user pools. Users generate on independent substreams,
/// so the output does not depend on `workers`.
Population generate_population(const PopulationSpec& spec, std::uint64_t seed,
                               std::size_t workers = 1);

inline constexpr double kReferenceSd = 0.2;

/// {0.05, 0.10, ..., 0.35}
std::vector<double> default_sd_grid();

struct SweepPoint {
    double grid_value = 0.0;
    double relative_sd = 0.0; // grid_value / kReferenceSd
    PopulationSpec spec;
};

/// Population fixed at sd 0.2, isolated user 0 at each grid value.
std::vector<SweepPoint> make_isolated_variance_config(std::span<const double> sd_grid,
                                                      const PopulationSpec& base = {});

/// Isolated user 0 fixed at sd 0.2, the rest sampled hierarchically around
/// each grid value.
std::vector<SweepPoint> make_population_variance_config(std::span<const double> mean_sd_grid,
                                                        const PopulationSpec& base = {});

/// Population used by the distance-classifier and user-count studies: all
/// users' SDs sampled around 0.2 with no isolated user.
PopulationSpec make_distance_classifier_spec(const PopulationSpec& base = {});

} // namespace araudit
