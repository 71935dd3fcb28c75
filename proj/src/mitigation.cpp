#include "araudit/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "araudit/error.hpp"
#include "araudit/rng.hpp"

namespace araudit {

namespace {

// alpha is snapped to a 2^-40 grid so that mu and 1 - mu, which can differ
// from exact mirrors by an ulp, select the same Beta law.
double snapped_alpha(double mean) {
    constexpr double scale = 0x1.0p40;
    return std::round(std::abs(0.5 - mean) * scale) / scale + 0.5;
}

} // namespace

BetaNoiseSpec BetaNoiseSpec::from_means(std::span<const double> means) {
    BetaNoiseSpec spec;
    spec.mean.assign(means.begin(), means.end());
    for (double mu : means) {
        if (!(mu >= 0.0 && mu <= 1.0)) {
            throw InvalidInput(fmt::format("beta-noise mean {} lies outside [0, 1]", mu));
        }
        spec.alpha.push_back(snapped_alpha(mu));
        spec.mirrored.push_back(mu > 0.5);
    }
    return spec;
}

std::vector<double> beta_noise(std::span<const double> user_means, std::size_t count,
                               std::uint64_t seed) {
    if (count == 0) throw InvalidInput("beta-noise count must be at least one");
    const BetaNoiseSpec spec = BetaNoiseSpec::from_means(user_means);
    const std::size_t n = user_means.size();
    std::vector<double> out(count * n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_rng(seed, {hash_tag("beta"), i});
        std::gamma_distribution<double> ga(spec.alpha[i], 1.0);
        std::gamma_distribution<double> gb(BetaNoiseSpec::beta, 1.0);
        for (std::size_t k = 0; k < count; ++k) {
            const double x = ga(rng);
            const double y = gb(rng);
            const double b = x + y > 0.0 ? x / (x + y) : 0.5;
            out[k * n + i] = spec.mirrored[i] ? 1.0 - b : b;
        }
    }
    return out;
}

std::vector<double> positive_means(const LabeledDataset& dataset) {
    const std::size_t n = dataset.feature_count();
    std::vector<double> mean(n, 0.0);
    std::size_t count = 0;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        if (dataset.label(r) != Label::Positive) continue;
        const auto x = dataset.row(r);
        for (std::size_t j = 0; j < n; ++j) mean[j] += x[j];
        ++count;
    }
    if (count == 0) throw InvalidInput("dataset has no positive samples");
    for (double& v : mean) v /= static_cast<double>(count);
    return mean;
}

LabeledDataset augment_training_set(const LabeledDataset& base,
                                    std::optional<std::size_t> beta_count,
                                    const std::optional<LabeledDataset>& aux_negatives,
                                    std::uint64_t seed) {
    const std::size_t n = base.feature_count();
    const std::size_t positives = base.count(Label::Positive);
    const std::size_t noise = beta_count.value_or(positives);

    if (aux_negatives) {
        if (aux_negatives->feature_count() != n) {
            throw InvalidInput(fmt::format("aux vectors have {} features, training set has {}",
                                           aux_negatives->feature_count(), n));
        }
        if (aux_negatives->size() < positives) {
            throw InvalidInput(fmt::format("need {} aux vectors, got {}", positives,
                                           aux_negatives->size()));
        }
    }

    LabeledDataset out = base;
    if (noise > 0) {
        auto means = positive_means(base);
        // Rounding can push a mean of values in [0,1] a hair past the ends.
        for (double& m : means) m = std::clamp(m, 0.0, 1.0);
        const auto rows = beta_noise(means, noise, derive_seed(seed, {hash_tag("beta-noise")}));
        out.reserve(out.size() + noise);
        for (std::size_t k = 0; k < noise; ++k) {
            out.add(std::span<const double>(rows).subspan(k * n, n), Label::Negative,
                    kBetaNoiseUser);
        }
    }
    if (aux_negatives) {
        std::vector<std::size_t> pick(aux_negatives->size());
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        if (pick.size() > positives) {
            Rng rng = make_rng(seed, {hash_tag("aux")});
            std::shuffle(pick.begin(), pick.end(), rng);
            pick.resize(positives);
            std::sort(pick.begin(), pick.end());
        }
        for (std::size_t r : pick) out.add(aux_negatives->row(r), Label::Negative, kAuxUser);
    }
    return out;
}

} // namespace araudit
