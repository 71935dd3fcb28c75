#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "araudit/dataset.hpp"
#include "araudit/model.hpp"

namespace araudit {

/// `count` equally spaced thresholds {0, 1/count, ..., (count-1)/count}.
std::vector<double> make_threshold_grid(std::size_t count = 100);

/// Monte Carlo estimate of the accepted fraction of the unit cube.
struct RegionEstimate {
    double accept_fraction = 0.0;
    std::size_t samples = 0;
    double standard_error = 0.0;
    std::uint64_t seed = 0;

    /// Volume of the rejection region.
    double reject_fraction() const { return 1.0 - accept_fraction; }
};

using ScoreFn = std::function<double(std::span<const double>)>;

/// Scores `n_samples` uniform draws from [0,1]^n once each and reports the
/// accepted fraction (score >= t) at every threshold of the ascending grid.
/// Draws come in fixed-size chunks with their own substreams and only counts
/// are reduced, so the result is independent of `workers`.
std::vector<RegionEstimate> estimate_acceptance_region(const ScoringModel& model,
                                                       std::size_t n_samples, std::uint64_t seed,
                                                       std::span<const double> grid,
                                                       std::size_t workers = 1);

/// Same estimator over an arbitrary scoring function on [0,1]^feature_count.
std::vector<RegionEstimate> estimate_acceptance_region(const ScoreFn& score,
                                                       std::size_t feature_count,
                                                       std::size_t n_samples, std::uint64_t seed,
                                                       std::span<const double> grid,
                                                       std::size_t workers = 1);

/// Fraction of `scores` that are >= each grid threshold (ascending grid).
std::vector<double> accept_fractions(std::span<const double> scores, std::span<const double> grid);

struct EerPoint {
    std::size_t index = 0;
    double threshold = 0.0;
    double frr = 0.0;
    double fpr = 0.0;
    double ar = 0.0;
    double discrepancy = 0.0; // |frr - fpr| at the chosen grid point
};

struct ThresholdCurve {
    std::vector<double> thresholds;
    std::vector<double> frr;
    std::vector<double> fpr;
    std::vector<double> ar;
    EerPoint eer;
};

/// FRR(t) = share of positives scoring < t, FPR(t) = share of negatives
/// scoring >= t, AR(t) from the supplied estimate. Fills in the EER point.
ThresholdCurve evaluate_curves(const ScoringModel& model, const LabeledDataset& test,
                               std::span<const RegionEstimate> ar, std::span<const double> grid);

/// Curve assembly from precomputed test scores.
ThresholdCurve curves_from_scores(std::span<const double> positive_scores,
                                  std::span<const double> negative_scores,
                                  std::span<const double> ar, std::span<const double> grid);

/// Grid index minimising |FRR - FPR|; ties go to the lowest threshold.
EerPoint find_eer(const ThresholdCurve& curve);

enum class VolumeMode { Binned, Span };

/// Filled-bin counts per feature and the implied log10 volume of the region
/// the samples occupy.
struct BinnedRegionReport {
    std::size_t bins = 100;
    std::size_t cutoff = 0;
    VolumeMode mode = VolumeMode::Binned;
    std::vector<std::size_t> alpha;
    double log10_volume = 0.0;
};

/// Bin of a value in [0,1] among `bins` equal bins; out-of-range values land
/// in the edge bins.
std::size_t bin_index(double value, std::size_t bins);

/// Binned: a bin is filled when it holds more than `cutoff` values.
/// Span: every bin between the bins of the feature's min and max is filled.
std::vector<std::vector<bool>> filled_bins(std::span<const double> rows, std::size_t feature_count,
                                           std::size_t bins, std::size_t cutoff, VolumeMode mode);

/// log10 V = sum_i log10(alpha_i / bins); -inf when some alpha_i is zero.
BinnedRegionReport measure_region_volume(std::span<const double> rows, std::size_t feature_count,
                                         std::size_t bins, std::size_t cutoff, VolumeMode mode);

/// log10 of the product over features of |filled(a) & filled(b)| / bins.
double region_overlap(std::span<const double> a, std::span<const double> b,
                      std::size_t feature_count, std::size_t bins, std::size_t cutoff,
                      VolumeMode mode);

} // namespace araudit
