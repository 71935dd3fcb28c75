#include "araudit/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "araudit/error.hpp"
#include "araudit/parallel.hpp"
#include "araudit/rng.hpp"

namespace araudit {

namespace {

// mean + sd * z keeps sd == 0 exact, which std::normal_distribution forbids.
struct Gaussian {
    std::normal_distribution<double> z{0.0, 1.0};
    double operator()(Rng& rng, double mean, double sd) { return mean + sd * z(rng); }
};

double clamp_nonneg(double v) { return v < 0.0 ? 0.0 : v; }

} // namespace

void PopulationSpec::validate() const {
    if (user_count < 2) throw InvalidInput("population needs at least two users");
    if (feature_count < 1) throw InvalidInput("population needs at least one feature");
    if (samples_per_user < 2) throw InvalidInput("each user needs at least two samples");
    if (!(sd_of_means >= 0.0) || !(sd_of_sds >= 0.0)) {
        throw InvalidInput("population spreads must be non-negative");
    }
    if (const auto* s = std::get_if<FixedSd>(&user_sd); s && !(s->sd >= 0.0)) {
        throw InvalidInput("fixed user sd must be non-negative");
    }
    if (const auto* s = std::get_if<SampledSd>(&user_sd);
        s && (!(s->center_sd >= 0.0) || !(s->spread_sd >= 0.0))) {
        throw InvalidInput("sampled sd spreads must be non-negative");
    }
    if (isolated && (isolated->index >= user_count || !(isolated->sd >= 0.0))) {
        throw InvalidInput("isolated user index or sd out of range");
    }
}

std::string synthetic_user_id(std::size_t index) { return fmt::format("u{:03}", index); }

FeatureDistribution sample_feature_distributions(const PopulationSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t n = spec.feature_count;
    Rng rng = make_rng(seed, {hash_tag("features")});
    Gaussian normal;

    FeatureDistribution d;
    d.mean.resize(n);
    d.spread.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.mean[i] = normal(rng, spec.mean_of_means, spec.sd_of_means);
        d.spread[i] = clamp_nonneg(normal(rng, spec.mean_of_sds, spec.sd_of_sds));
    }
    if (const auto* s = std::get_if<SampledSd>(&spec.user_sd)) {
        d.sd_center.resize(n);
        d.sd_spread.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            d.sd_center[i] = clamp_nonneg(normal(rng, s->center_mean, s->center_sd));
            d.sd_spread[i] = clamp_nonneg(normal(rng, s->spread_mean, s->spread_sd));
        }
    }
    return d;
}

UserProfile sample_user_profile(const PopulationSpec& spec, const FeatureDistribution& dist,
                                std::size_t index, std::uint64_t seed) {
    const std::size_t n = spec.feature_count;
    Rng rng = make_rng(seed, {hash_tag("user"), index});
    Gaussian normal;

    UserProfile p;
    p.mean.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.mean[i] = normal(rng, dist.mean[i], dist.spread[i]);

    p.sd.resize(n);
    if (spec.isolated && spec.isolated->index == index) {
        std::fill(p.sd.begin(), p.sd.end(), spec.isolated->sd);
    } else if (const auto* f = std::get_if<FixedSd>(&spec.user_sd)) {
        std::fill(p.sd.begin(), p.sd.end(), f->sd);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            p.sd[i] = clamp_nonneg(normal(rng, dist.sd_center[i], dist.sd_spread[i]));
        }
    }
    return p;
}

Population generate_population(const PopulationSpec& spec, std::uint64_t seed,
                               std::size_t workers) {
    const FeatureDistribution dist = sample_feature_distributions(spec, seed);
    const std::size_t n = spec.feature_count;

    Population pop;
    pop.feature_count = n;
    pop.users.resize(spec.user_count);
    parallel_for(spec.user_count, workers, [&](std::size_t u) {
        const UserProfile profile = sample_user_profile(spec, dist, u, seed);
        Rng rng = make_rng(seed, {hash_tag("samples"), u});
        Gaussian normal;
        UserPool pool{synthetic_user_id(u), {}};
        pool.values.resize(spec.samples_per_user * n);
        for (std::size_t r = 0; r < spec.samples_per_user; ++r) {
            for (std::size_t i = 0; i < n; ++i) {
                pool.values[r * n + i] = normal(rng, profile.mean[i], profile.sd[i]);
            }
        }
        pop.users[u] = std::move(pool);
    });
    return pop;
}

std::vector<double> default_sd_grid() { return {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35}; }

std::vector<SweepPoint> make_isolated_variance_config(std::span<const double> sd_grid,
                                                      const PopulationSpec& base) {
    if (sd_grid.empty()) throw InvalidInput("isolated-variance grid is empty");
    std::vector<SweepPoint> points;
    for (double g : sd_grid) {
        if (!(g > 0.0)) throw InvalidInput("isolated-variance grid values must be positive");
        PopulationSpec spec = base;
        spec.user_sd = FixedSd{kReferenceSd};
        spec.isolated = IsolatedUser{0, g};
        points.push_back({g, g / kReferenceSd, spec});
    }
    return points;
}

std::vector<SweepPoint> make_population_variance_config(std::span<const double> mean_sd_grid,
                                                        const PopulationSpec& base) {
    if (mean_sd_grid.empty()) throw InvalidInput("population-variance grid is empty");
    std::vector<SweepPoint> points;
    for (double g : mean_sd_grid) {
        PopulationSpec spec = base;
        spec.user_sd = SampledSd{g, 0.05, 0.03, 0.02};
        spec.isolated = IsolatedUser{0, kReferenceSd};
        points.push_back({g, g / kReferenceSd, spec});
    }
    return points;
}

PopulationSpec make_distance_classifier_spec(const PopulationSpec& base) {
    PopulationSpec spec = base;
    spec.user_sd = SampledSd{kReferenceSd, 0.05, 0.03, 0.02};
    spec.isolated.reset();
    return spec;
}

} // namespace araudit
