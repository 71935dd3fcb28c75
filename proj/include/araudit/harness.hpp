#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "araudit/dataset.hpp"
#include "araudit/model.hpp"
#include "araudit/region.hpp"
#include "araudit/synthgen.hpp"

namespace araudit {

inline constexpr std::string_view kToolVersion = "araudit 0.1.0";

/// Per-user evaluation settings shared by every experiment.
struct EvalConfig {
    double train_fraction = 0.7;
    std::size_t mc_samples = 1'000'000;
    std::size_t repetitions = 50;
    std::size_t threshold_count = 100;
    /// When set, only this threshold is evaluated (variance sweeps use 0.5).
    std::optional<double> fixed_threshold;
    /// Train on the thirds (or, with aux, quarters) composition.
    bool mitigation = false;
    std::optional<LabeledDataset> aux_negatives;
    std::size_t region_bins = 100;
    std::size_t region_cutoff = 0;
    std::size_t workers = 1;

    std::vector<double> grid() const;
};

/// A normalized population with its fixed per-user train/test partition.
struct PreparedPopulation {
    Population normalized;
    NormalizationParams params;
    Population train;
    Population test;
};

PreparedPopulation prepare_population(const Population& raw, double train_fraction,
                                      std::uint64_t split_seed);

struct UserEvaluationReport {
    UserId user;
    Algorithm classifier = Algorithm::LinearSvm;
    /// FRR/FPR/AR averaged pointwise over repetitions, EER located on the average.
    ThresholdCurve curve;
    /// AR curve of every repetition.
    std::vector<std::vector<double>> repetition_ar;
    double log10_positive_region = 0.0;
    double log10_negative_region = 0.0;
    /// Non-empty when the evaluation failed; numeric fields are then meaningless.
    std::string error;

    bool ok() const { return error.empty(); }
};

/// Steps 3-7 for one target user on a prepared population. Each repetition
/// re-samples negatives, the model seed, the beta noise and the Monte Carlo
/// stream; the split stays fixed. Failures are captured in `error`.
UserEvaluationReport evaluate_user(const PreparedPopulation& prepared, const UserId& target,
                                   const TrainConfig& classifier, const EvalConfig& eval,
                                   std::uint64_t seed);

/// normalize -> split -> balance -> train -> curves -> AR -> EER.
UserEvaluationReport run_user_evaluation(const Population& raw, const UserId& target,
                                         const TrainConfig& classifier, const EvalConfig& eval,
                                         std::uint64_t seed);

/// Names accepted by `experiment`.
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
    std::string experiment = "per-user-ar";
    std::string profile = "quick";
    std::uint64_t seed = 1;
    std::size_t repetitions = 5;
    std::size_t mc_samples = 10'000;
    /// 0: the experiment's default (1000 for distance-classifier, else 100).
    std::size_t threshold_count = 0;
    /// Target users evaluated per population; 0 evaluates everyone.
    std::size_t eval_users = 20;
    double train_fraction = 0.7;
    std::vector<Algorithm> classifiers;
    /// Sweep values: SDs for the variance sweeps, user counts for vary-users.
    std::vector<double> grid;
    std::optional<double> fixed_threshold;
    PopulationSpec population;
    TrainConfig train;
    std::optional<std::filesystem::path> dataset;
    std::optional<std::filesystem::path> aux;
    std::size_t region_bins = 100;
    std::size_t region_cutoff = 0;

    // Run-time only; never written to the manifest.
    std::filesystem::path out_dir = "araudit-out";
    std::size_t workers = 1;
};

/// Fills the per-experiment defaults (classifiers, grid, population shape,
/// threshold count) for fields the caller left empty.
void apply_experiment_defaults(ExperimentConfig& config);

/// quick: 10^4 MC samples, 5 repetitions, 20 evaluated users.
/// paper: 10^6 MC samples, 50 repetitions, 50 evaluated users.
void apply_profile(ExperimentConfig& config, std::string_view profile);

/// YAML config files. Keys mirror ExperimentConfig; see README for the schema.
ExperimentConfig parse_experiment_config(const std::string& yaml_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Manifest form: reloading it reproduces the run.
std::string dump_experiment_config(const ExperimentConfig& config);

/// Applies ARAUDIT_OUT / ARAUDIT_WORKERS when set.
void apply_environment(ExperimentConfig& config);

/// Runs a named experiment and writes its CSVs, manifest and summary under
/// config.out_dir. Returns the written files in a stable order.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config);

/// Per-user reports as written by `evaluate` / per-user-ar.
std::vector<std::filesystem::path> emit_report(const std::vector<UserEvaluationReport>& reports,
                                               const ExperimentConfig& config,
                                               const std::string& summary_title);

/// Re-aggregates units.csv in `dir` into report.csv (means per group).
std::filesystem::path aggregate_units(const std::filesystem::path& dir);

/// The separable two-class set where feature 0 alone decides the class:
/// positives have x0 in (0.5, 1], negatives x0 in [0, 0.5), other features uniform.
LabeledDataset make_half_space_dataset(std::size_t feature_count, std::size_t per_class,
                                       std::uint64_t seed);

/// (w, b) = ((1, 0, ..., 0), -0.5): the hyperplane x0 = 0.5.
LinearParams half_space_initialization(std::size_t feature_count);

} // namespace araudit
