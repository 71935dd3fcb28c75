#include "araudit/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "araudit/error.hpp"
#include "araudit/parallel.hpp"
#include "araudit/rng.hpp"

namespace araudit {

namespace {

constexpr std::size_t kChunk = 16384;

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw InvalidInput("threshold grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw InvalidInput("threshold grid must be ascending");
    }
}

// Slot k counts scores accepted at exactly the first k thresholds.
std::size_t accepted_prefix(double score, std::span<const double> grid) {
    return static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), score) -
                                    grid.begin());
}

std::vector<RegionEstimate> from_histogram(std::span<const std::uint64_t> hist,
                                           std::size_t samples, std::uint64_t seed,
                                           std::size_t thresholds) {
    std::vector<RegionEstimate> out(thresholds);
    std::uint64_t accepted = 0;
    for (std::size_t j = thresholds; j-- > 0;) {
        accepted += hist[j + 1];
        const double p = static_cast<double>(accepted) / static_cast<double>(samples);
        out[j] = {p, samples, std::sqrt(p * (1.0 - p) / static_cast<double>(samples)), seed};
    }
    return out;
}

} // namespace

std::vector<double> make_threshold_grid(std::size_t count) {
    if (count == 0) throw InvalidInput("threshold grid needs at least one value");
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k) {
        grid[k] = static_cast<double>(k) / static_cast<double>(count);
    }
    return grid;
}

std::vector<RegionEstimate> estimate_acceptance_region(const ScoreFn& score,
                                                       std::size_t feature_count,
                                                       std::size_t n_samples, std::uint64_t seed,
                                                       std::span<const double> grid,
                                                       std::size_t workers) {
    if (n_samples == 0) throw InvalidInput("Monte Carlo estimate needs at least one sample");
    if (feature_count == 0) throw InvalidInput("feature count must be positive");
    check_grid(grid);

    const std::size_t chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<std::vector<std::uint64_t>> partial(chunks);
    parallel_for(chunks, workers, [&](std::size_t c) {
        Rng rng = make_rng(seed, {hash_tag("mc"), c});
        const std::size_t count = std::min(kChunk, n_samples - c * kChunk);
        std::vector<std::uint64_t> hist(grid.size() + 1, 0);
        std::vector<double> x(feature_count);
        for (std::size_t s = 0; s < count; ++s) {
            for (double& v : x) v = uniform01(rng);
            ++hist[accepted_prefix(score(x), grid)];
        }
        partial[c] = std::move(hist);
    });

    std::vector<std::uint64_t> hist(grid.size() + 1, 0);
    for (const auto& p : partial) {
        for (std::size_t k = 0; k < hist.size(); ++k) hist[k] += p[k];
    }
    return from_histogram(hist, n_samples, seed, grid.size());
}

std::vector<RegionEstimate> estimate_acceptance_region(const ScoringModel& model,
                                                       std::size_t n_samples, std::uint64_t seed,
                                                       std::span<const double> grid,
                                                       std::size_t workers) {
    return estimate_acceptance_region(
        [&model](std::span<const double> x) { return model.score_unchecked(x); },
        model.feature_count(), n_samples, seed, grid, workers);
}

namespace {

// Share of scores >= t (or < t when `rejected`), from exact counts.
std::vector<double> score_fractions(std::span<const double> scores, std::span<const double> grid,
                                    bool rejected) {
    check_grid(grid);
    std::vector<std::uint64_t> hist(grid.size() + 1, 0);
    for (double s : scores) ++hist[accepted_prefix(s, grid)];
    std::vector<double> out(grid.size(), 0.0);
    if (scores.empty()) return out;
    std::uint64_t accepted = 0;
    for (std::size_t j = grid.size(); j-- > 0;) {
        accepted += hist[j + 1];
        const std::uint64_t count = rejected ? scores.size() - accepted : accepted;
        out[j] = static_cast<double>(count) / static_cast<double>(scores.size());
    }
    return out;
}

} // namespace

std::vector<double> accept_fractions(std::span<const double> scores,
                                     std::span<const double> grid) {
    return score_fractions(scores, grid, false);
}

ThresholdCurve curves_from_scores(std::span<const double> positive_scores,
                                  std::span<const double> negative_scores,
                                  std::span<const double> ar, std::span<const double> grid) {
    if (positive_scores.empty() || negative_scores.empty()) {
        throw InvalidInput("curve evaluation needs both positive and negative test samples");
    }
    if (ar.size() != grid.size()) throw InvalidInput("AR series does not match the grid");

    ThresholdCurve c;
    c.thresholds.assign(grid.begin(), grid.end());
    c.frr = score_fractions(positive_scores, grid, true);
    c.fpr = accept_fractions(negative_scores, grid);
    c.ar.assign(ar.begin(), ar.end());
    c.eer = find_eer(c);
    return c;
}

ThresholdCurve evaluate_curves(const ScoringModel& model, const LabeledDataset& test,
                               std::span<const RegionEstimate> ar, std::span<const double> grid) {
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t i = 0; i < test.size(); ++i) {
        (test.label(i) == Label::Positive ? pos : neg).push_back(model.score(test.row(i)));
    }
    std::vector<double> ar_values(ar.size());
    std::transform(ar.begin(), ar.end(), ar_values.begin(),
                   [](const RegionEstimate& e) { return e.accept_fraction; });
    return curves_from_scores(pos, neg, ar_values, grid);
}

EerPoint find_eer(const ThresholdCurve& curve) {
    const std::size_t T = curve.frr.size();
    if (T == 0 || curve.fpr.size() != T) throw InvalidInput("curve is empty or ragged");
    std::size_t best = 0;
    double best_gap = std::abs(curve.frr[0] - curve.fpr[0]);
    for (std::size_t k = 1; k < T; ++k) {
        const double gap = std::abs(curve.frr[k] - curve.fpr[k]);
        if (gap < best_gap) {
            best_gap = gap;
            best = k;
        }
    }
    EerPoint e;
    e.index = best;
    e.threshold = best < curve.thresholds.size() ? curve.thresholds[best] : 0.0;
    e.frr = curve.frr[best];
    e.fpr = curve.fpr[best];
    e.ar = best < curve.ar.size() ? curve.ar[best] : 0.0;
    e.discrepancy = best_gap;
    return e;
}

std::size_t bin_index(double value, std::size_t bins) {
    if (!(value > 0.0)) return 0;
    if (value >= 1.0) return bins - 1;
    return std::min(static_cast<std::size_t>(value * static_cast<double>(bins)), bins - 1);
}

std::vector<std::vector<bool>> filled_bins(std::span<const double> rows, std::size_t feature_count,
                                           std::size_t bins, std::size_t cutoff, VolumeMode mode) {
    if (feature_count == 0 || rows.empty()) throw InvalidInput("region volume needs samples");
    if (rows.size() % feature_count != 0) throw InvalidInput("sample block is ragged");
    if (bins == 0) throw InvalidInput("bin count must be positive");

    const std::size_t m = rows.size() / feature_count;
    std::vector<std::vector<bool>> filled(feature_count, std::vector<bool>(bins, false));
    std::vector<std::size_t> counts(bins);
    for (std::size_t f = 0; f < feature_count; ++f) {
        if (mode == VolumeMode::Binned) {
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t r = 0; r < m; ++r) ++counts[bin_index(rows[r * feature_count + f], bins)];
            for (std::size_t b = 0; b < bins; ++b) filled[f][b] = counts[b] > cutoff;
        } else {
            double lo = rows[f];
            double hi = rows[f];
            for (std::size_t r = 1; r < m; ++r) {
                lo = std::min(lo, rows[r * feature_count + f]);
                hi = std::max(hi, rows[r * feature_count + f]);
            }
            for (std::size_t b = bin_index(lo, bins); b <= bin_index(hi, bins); ++b) {
                filled[f][b] = true;
            }
        }
    }
    return filled;
}

namespace {

double log10_volume(std::span<const std::size_t> alpha, std::size_t bins) {
    double v = 0.0;
    for (std::size_t a : alpha) {
        if (a == 0) return -std::numeric_limits<double>::infinity();
        v += std::log10(static_cast<double>(a) / static_cast<double>(bins));
    }
    return v;
}

} // namespace

BinnedRegionReport measure_region_volume(std::span<const double> rows, std::size_t feature_count,
                                         std::size_t bins, std::size_t cutoff, VolumeMode mode) {
    const auto filled = filled_bins(rows, feature_count, bins, cutoff, mode);
    BinnedRegionReport report{bins, cutoff, mode, {}, 0.0};
    report.alpha.reserve(feature_count);
    for (const auto& f : filled) {
        report.alpha.push_back(static_cast<std::size_t>(std::count(f.begin(), f.end(), true)));
    }
    report.log10_volume = log10_volume(report.alpha, bins);
    return report;
}

double region_overlap(std::span<const double> a, std::span<const double> b,
                      std::size_t feature_count, std::size_t bins, std::size_t cutoff,
                      VolumeMode mode) {
    if (feature_count == 0 || a.size() % feature_count != 0 || b.size() % feature_count != 0) {
        throw InvalidInput("overlap inputs must share the feature count");
    }
    const auto fa = filled_bins(a, feature_count, bins, cutoff, mode);
    const auto fb = filled_bins(b, feature_count, bins, cutoff, mode);
    std::vector<std::size_t> shared(feature_count, 0);
    for (std::size_t f = 0; f < feature_count; ++f) {
        for (std::size_t k = 0; k < bins; ++k) shared[f] += fa[f][k] && fb[f][k] ? 1 : 0;
    }
    return log10_volume(shared, bins);
}

} // namespace araudit
