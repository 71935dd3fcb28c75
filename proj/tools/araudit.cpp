#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "araudit/csv.hpp"
#include "araudit/error.hpp"
#include "araudit/harness.hpp"
#include "araudit/model_io.hpp"
#include "araudit/region.hpp"
#include "araudit/rng.hpp"

namespace fs = std::filesystem;
using namespace araudit;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> profile;
    std::optional<std::size_t> mc_samples;
    std::optional<std::size_t> reps;
    std::optional<std::size_t> thresholds;
    std::vector<std::string> classifiers;
    std::optional<std::size_t> workers;
    std::optional<std::string> config;
};

// config file < environment < profile flag < explicit flags
ExperimentConfig resolve(const Globals& g, const std::string& experiment, bool named = false) {
    ExperimentConfig c;
    if (g.config) c = load_experiment_config(*g.config);
    if (!experiment.empty()) c.experiment = experiment;
    apply_environment(c);
    if (g.profile) apply_profile(c, *g.profile);
    if (g.seed) c.seed = *g.seed;
    if (g.out) c.out_dir = *g.out;
    if (g.mc_samples) c.mc_samples = *g.mc_samples;
    if (g.reps) c.repetitions = *g.reps;
    if (g.thresholds) c.threshold_count = *g.thresholds;
    if (g.workers) c.workers = *g.workers;
    if (!g.classifiers.empty()) {
        c.classifiers.clear();
        for (const auto& tag : g.classifiers) c.classifiers.push_back(parse_algorithm(tag));
    }
    // named experiments pick their own grid size
    if (!named && c.threshold_count == 0) c.threshold_count = 100;
    if (c.repetitions == 0) throw InvalidInput("--reps must be at least one");
    if (c.mc_samples == 0) throw InvalidInput("--mc-samples must be at least one");
    return c;
}

void print_files(const std::vector<fs::path>& files) {
    for (const auto& f : files) std::cout << f.string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance-region audit toolkit for biometric classifiers"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--out", g.out, "output directory (env ARAUDIT_OUT)");
    app.add_option("--profile", g.profile, "quick | paper")->check(CLI::IsMember({"quick", "paper"}));
    app.add_option("--mc-samples", g.mc_samples, "Monte Carlo vectors per estimate");
    app.add_option("--reps", g.reps, "repetitions");
    app.add_option("--thresholds", g.thresholds, "threshold grid size");
    app.add_option("--classifier", g.classifiers, "perceptron|linsvm|rbfsvm|rndf|mlp|cosine (repeatable)")
        ->check(CLI::IsMember({"perceptron", "linsvm", "rbfsvm", "rndf", "mlp", "cosine"}));
    app.add_option("--workers", g.workers, "worker threads (env ARAUDIT_WORKERS)");
    app.add_option("--config", g.config, "YAML config file")->check(CLI::ExistingFile);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic population as CSV");
    std::optional<std::size_t> users, features, samples;
    std::optional<double> user_sd;
    std::string gen_file;
    gen->add_option("--users", users, "user count");
    gen->add_option("--features", features, "feature count");
    gen->add_option("--samples", samples, "samples per user");
    gen->add_option("--user-sd", user_sd, "fixed per-user SD");
    gen->add_option("-o,--file", gen_file, "CSV path (default <out>/population.csv)");

    // train
    auto* train = app.add_subcommand("train", "train a classifier and save the model");
    std::string train_data, train_target, model_path = "model.txt";
    train->add_option("--data", train_data, "dataset CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--target", train_target,
                      "target user: normalize, split and balance as in evaluate; "
                      "otherwise the CSV labels are used as given");
    train->add_option("-m,--model", model_path, "model file to write");

    // measure-ar
    auto* measure = app.add_subcommand("measure-ar", "estimate a model's acceptance region");
    std::string measure_model, region_data, region_file;
    std::size_t bins = 100, cutoff = 0;
    bool span = false;
    measure->add_option("-m,--model", measure_model, "model file")->check(CLI::ExistingFile);
    measure->add_option("--region-data", region_data,
                        "CSV of samples: report their binned region volume instead")
        ->check(CLI::ExistingFile);
    measure->add_option("--bins", bins, "bins per feature");
    measure->add_option("--cutoff", cutoff, "a bin is filled with more than this many values");
    measure->add_flag("--span", span, "span mode instead of binned");
    measure->add_option("-o,--file", region_file, "CSV path (default <out>/ar.csv or region.csv)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "per-user methodology run");
    std::string eval_data;
    std::vector<std::string> eval_users;
    bool mitigate = false;
    evaluate->add_option("--data", eval_data, "dataset CSV (default: synthetic population)")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--user", eval_users, "target user ids (repeatable; default first N)");
    evaluate->add_flag("--mitigate", mitigate, "train with beta-noise negatives");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a named experiment");
    std::string experiment_name;
    experiment->add_option("name", experiment_name, "experiment name")
        ->required()
        ->check(CLI::IsMember(experiment_names()));

    // report
    auto* report = app.add_subcommand("report", "aggregate units.csv into report.csv");
    std::string report_dir;
    report->add_option("dir", report_dir, "output directory of a run");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            ExperimentConfig c = resolve(g, "");
            PopulationSpec spec = c.population;
            if (users) spec.user_count = *users;
            if (features) spec.feature_count = *features;
            if (samples) spec.samples_per_user = *samples;
            if (user_sd) spec.user_sd = FixedSd{*user_sd};
            const Population pop = generate_population(spec, derive_seed(c.seed, {hash_tag("generate")}),
                                                       c.workers);
            fs::path path = gen_file.empty() ? c.out_dir / "population.csv" : fs::path(gen_file);
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            write_dataset_csv(path, flatten(pop));
            std::cout << path.string() << '\n';
        } else if (*train) {
            ExperimentConfig c = resolve(g, "");
            TrainConfig cfg = c.train;
            cfg.algorithm = c.classifiers.empty() ? Algorithm::LinearSvm : c.classifiers.front();
            cfg.seed = derive_seed(c.seed, {hash_tag("model")});
            const LabeledDataset data = read_dataset_csv(fs::path(train_data));
            LabeledDataset set;
            if (train_target.empty()) {
                set = data;
            } else {
                const auto [normalized, params] = min_max_normalize(group_by_user(data));
                set = assemble_user_task(normalized, train_target, c.train_fraction, c.seed).train;
            }
            const ScoringModel model = train_model(set, cfg);
            save_model(fs::path(model_path), model);
            std::cout << model_path << '\n';
        } else if (*measure) {
            ExperimentConfig c = resolve(g, "");
            fs::create_directories(c.out_dir);
            if (!region_data.empty()) {
                const LabeledDataset data = read_dataset_csv(fs::path(region_data));
                const auto r = measure_region_volume(data.values(), data.feature_count(), bins, cutoff,
                                                     span ? VolumeMode::Span : VolumeMode::Binned);
                const fs::path path = region_file.empty() ? c.out_dir / "region.csv" : fs::path(region_file);
                std::ofstream out(path);
                out << "feature_index,alpha\n";
                for (std::size_t i = 0; i < r.alpha.size(); ++i) out << i << ',' << r.alpha[i] << '\n';
                if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
                std::cout << path.string() << '\n' << fmt::format("log10_volume {:.6f}\n", r.log10_volume);
            } else {
                if (measure_model.empty()) throw InvalidInput("measure-ar needs --model or --region-data");
                const ScoringModel model = load_model(fs::path(measure_model));
                const auto grid = make_threshold_grid(c.threshold_count);
                const auto est = estimate_acceptance_region(
                    model, c.mc_samples, derive_seed(c.seed, {hash_tag("mc")}), grid, c.workers);
                const fs::path path = region_file.empty() ? c.out_dir / "ar.csv" : fs::path(region_file);
                std::ofstream out(path);
                out << "threshold,ar,standard_error\n";
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    out << fmt::format("{:.6f},{:.6f},{:.6f}\n", grid[k], est[k].accept_fraction,
                                       est[k].standard_error);
                }
                if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
                std::cout << path.string() << '\n';
            }
        } else if (*evaluate) {
            ExperimentConfig c = resolve(g, "per-user-ar");
            if (!eval_data.empty()) c.dataset = eval_data;
            if (c.classifiers.empty()) c.classifiers = {Algorithm::LinearSvm};
            const std::uint64_t cell = derive_seed(c.seed, {hash_tag("evaluate")});
            const Population raw = c.dataset
                                       ? group_by_user(read_dataset_csv(*c.dataset))
                                       : generate_population(c.population,
                                                             derive_seed(cell, {hash_tag("population")}),
                                                             c.workers);
            const PreparedPopulation prep =
                prepare_population(raw, c.train_fraction, derive_seed(cell, {hash_tag("split")}));
            if (eval_users.empty()) {
                const std::size_t n = c.eval_users == 0 ? prep.normalized.users.size()
                                                        : std::min(c.eval_users, prep.normalized.users.size());
                for (std::size_t u = 0; u < n; ++u) eval_users.push_back(prep.normalized.users[u].id);
            }
            EvalConfig eval;
            eval.train_fraction = c.train_fraction;
            eval.mc_samples = c.mc_samples;
            eval.repetitions = c.repetitions;
            eval.threshold_count = c.threshold_count;
            eval.fixed_threshold = c.fixed_threshold;
            eval.mitigation = mitigate;
            eval.region_bins = c.region_bins;
            eval.region_cutoff = c.region_cutoff;
            eval.workers = c.workers;
            std::vector<UserEvaluationReport> reports;
            for (const auto& user : eval_users) {
                for (Algorithm a : c.classifiers) {
                    TrainConfig t = c.train;
                    t.algorithm = a;
                    reports.push_back(evaluate_user(
                        prep, user, t, eval, derive_seed(cell, {hash_tag(user), static_cast<std::uint64_t>(a)})));
                    if (!reports.back().ok()) {
                        std::cerr << fmt::format("warning: {} {}: {}\n", user, to_string(a),
                                                 reports.back().error);
                    }
                }
            }
            print_files(emit_report(reports, c, "Per-user evaluation"));
        } else if (*experiment) {
            print_files(run_experiment(resolve(g, experiment_name, true)));
        } else if (*report) {
            ExperimentConfig c = resolve(g, "");
            std::cout << aggregate_units(report_dir.empty() ? c.out_dir : fs::path(report_dir)).string()
                      << '\n';
        }
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
