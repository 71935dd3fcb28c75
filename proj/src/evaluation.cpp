#include <cmath>
#include <exception>
#include <limits>

#include "araudit/error.hpp"
#include "araudit/harness.hpp"
#include "araudit/mitigation.hpp"
#include "araudit/rng.hpp"

namespace araudit {

std::vector<double> EvalConfig::grid() const {
    if (fixed_threshold) return {*fixed_threshold};
    return make_threshold_grid(threshold_count);
}

PreparedPopulation prepare_population(const Population& raw, double train_fraction,
                                      std::uint64_t split_seed) {
    auto [normalized, params] = min_max_normalize(raw);
    auto [train, test] = train_test_split(normalized, train_fraction, split_seed);
    return {std::move(normalized), std::move(params), std::move(train), std::move(test)};
}

namespace {

std::vector<double> rows_with_label(const LabeledDataset& ds, Label label) {
    std::vector<double> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.label(i) != label) continue;
        const auto x = ds.row(i);
        out.insert(out.end(), x.begin(), x.end());
    }
    return out;
}

} // namespace

UserEvaluationReport evaluate_user(const PreparedPopulation& prepared, const UserId& target,
                                   const TrainConfig& classifier, const EvalConfig& eval,
                                   std::uint64_t seed) {
    UserEvaluationReport report;
    report.user = target;
    report.classifier = classifier.algorithm;
    try {
        if (eval.repetitions == 0) throw InvalidInput("repetitions must be at least one");
        const std::vector<double> grid = eval.grid();
        const std::size_t T = grid.size();
        std::vector<double> frr(T, 0.0), fpr(T, 0.0), ar(T, 0.0);
        const std::size_t n = prepared.normalized.feature_count;

        for (std::size_t r = 0; r < eval.repetitions; ++r) {
            const UserTask task = assemble_from_split(
                prepared.train, prepared.test, target, derive_seed(seed, {hash_tag("negatives"), r}));
            if (r == 0) {
                const auto pos = rows_with_label(task.train, Label::Positive);
                const auto neg = rows_with_label(task.train, Label::Negative);
                report.log10_positive_region =
                    measure_region_volume(pos, n, eval.region_bins, eval.region_cutoff,
                                          VolumeMode::Binned)
                        .log10_volume;
                report.log10_negative_region =
                    measure_region_volume(neg, n, eval.region_bins, eval.region_cutoff,
                                          VolumeMode::Binned)
                        .log10_volume;
            }

            TrainConfig cfg = classifier;
            cfg.seed = derive_seed(seed, {hash_tag("model"), r});
            const ScoringModel model =
                eval.mitigation
                    ? train_model(augment_training_set(task.train, std::nullopt, eval.aux_negatives,
                                                       derive_seed(seed, {hash_tag("mitigation"), r})),
                                  cfg)
                    : train_model(task.train, cfg);

            const auto estimate = estimate_acceptance_region(
                model, eval.mc_samples, derive_seed(seed, {hash_tag("mc"), r}), grid, eval.workers);
            const ThresholdCurve curve = evaluate_curves(model, task.test, estimate, grid);
            for (std::size_t k = 0; k < T; ++k) {
                frr[k] += curve.frr[k];
                fpr[k] += curve.fpr[k];
                ar[k] += curve.ar[k];
            }
            report.repetition_ar.push_back(curve.ar);
        }

        const auto reps = static_cast<double>(eval.repetitions);
        for (std::size_t k = 0; k < T; ++k) {
            frr[k] /= reps;
            fpr[k] /= reps;
            ar[k] /= reps;
        }
        report.curve.thresholds = grid;
        report.curve.frr = std::move(frr);
        report.curve.fpr = std::move(fpr);
        report.curve.ar = std::move(ar);
        report.curve.eer = find_eer(report.curve);
    } catch (const std::exception& e) {
        report.error = e.what();
        if (report.error.empty()) report.error = "evaluation failed";
    }
    return report;
}

UserEvaluationReport run_user_evaluation(const Population& raw, const UserId& target,
                                         const TrainConfig& classifier, const EvalConfig& eval,
                                         std::uint64_t seed) {
    const PreparedPopulation prepared =
        prepare_population(raw, eval.train_fraction, derive_seed(seed, {hash_tag("split")}));
    return evaluate_user(prepared, target, classifier, eval, seed);
}

LabeledDataset make_half_space_dataset(std::size_t feature_count, std::size_t per_class,
                                       std::uint64_t seed) {
    if (feature_count == 0 || per_class == 0) {
        throw InvalidInput("half-space dataset needs features and samples");
    }
    Rng rng = make_rng(seed, {hash_tag("half-space")});
    LabeledDataset ds(feature_count);
    ds.reserve(2 * per_class);
    std::vector<double> x(feature_count);
    for (Label label : {Label::Positive, Label::Negative}) {
        for (std::size_t k = 0; k < per_class; ++k) {
            for (double& v : x) v = uniform01(rng);
            // x0 strictly on its side of 0.5
            x[0] = label == Label::Positive ? 1.0 - 0.5 * x[0] : 0.5 * x[0];
            ds.add(x, label, label == Label::Positive ? "pos" : "neg");
        }
    }
    return ds;
}

LinearParams half_space_initialization(std::size_t feature_count) {
    LinearParams p{std::vector<double>(feature_count, 0.0), -0.5};
    p.w.at(0) = 1.0;
    return p;
}

} // namespace araudit
