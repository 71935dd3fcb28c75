#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "araudit/error.hpp"
#include "araudit/harness.hpp"

namespace araudit {

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "per-user-ar",         "roc-curves", "isolated-variance", "population-variance",
        "distance-classifier", "vary-users", "mitigation",        "propositions"};
    return names;
}

void apply_profile(ExperimentConfig& config, std::string_view profile) {
    if (profile == "quick") {
        config.mc_samples = 10'000;
        config.repetitions = 5;
        config.eval_users = 20;
    } else if (profile == "paper") {
        config.mc_samples = 1'000'000;
        config.repetitions = 50;
        config.eval_users = 50;
    } else {
        throw InvalidInput(fmt::format("unknown profile '{}' (expected quick|paper)", profile));
    }
    config.profile = std::string(profile);
}

void apply_experiment_defaults(ExperimentConfig& config) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), config.experiment) == names.end()) {
        throw InvalidInput(fmt::format("unknown experiment '{}'", config.experiment));
    }
    const std::string& e = config.experiment;
    if (config.classifiers.empty()) {
        if (e == "propositions") {
            config.classifiers = {Algorithm::Perceptron};
        } else if (e == "distance-classifier") {
            config.classifiers = {Algorithm::Cosine, Algorithm::LinearSvm, Algorithm::RbfSvm,
                                  Algorithm::RandomForest};
        } else {
            config.classifiers = {Algorithm::LinearSvm, Algorithm::RbfSvm, Algorithm::RandomForest,
                                  Algorithm::Mlp};
        }
    }
    if (config.grid.empty()) {
        if (e == "isolated-variance" || e == "population-variance") {
            config.grid = default_sd_grid();
        } else if (e == "vary-users") {
            config.grid = {25, 50, 75, 100, 125, 150};
        }
    }
    if (!config.fixed_threshold && (e == "isolated-variance" || e == "population-variance")) {
        config.fixed_threshold = 0.5;
    }
    if (config.threshold_count == 0) {
        config.threshold_count = e == "distance-classifier" ? 1000 : 100;
    }
}

void apply_environment(ExperimentConfig& config) {
    if (const char* out = std::getenv("ARAUDIT_OUT"); out && *out) config.out_dir = out;
    if (const char* w = std::getenv("ARAUDIT_WORKERS"); w && *w) {
        try {
            const long v = std::stol(w);
            if (v > 0) config.workers = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw InvalidInput(fmt::format("ARAUDIT_WORKERS must be a positive integer, got '{}'", w));
        }
    }
}

namespace {

template <class T>
void read(const YAML::Node& node, const char* key, T& dst) {
    if (const auto v = node[key]) dst = v.as<T>();
}

void read_population(const YAML::Node& node, PopulationSpec& spec) {
    read(node, "user_count", spec.user_count);
    read(node, "feature_count", spec.feature_count);
    read(node, "samples_per_user", spec.samples_per_user);
    read(node, "mean_of_means", spec.mean_of_means);
    read(node, "sd_of_means", spec.sd_of_means);
    read(node, "mean_of_sds", spec.mean_of_sds);
    read(node, "sd_of_sds", spec.sd_of_sds);
    if (const auto sd = node["user_sd"]) {
        const auto policy = sd["policy"].as<std::string>("fixed");
        if (policy == "fixed") {
            FixedSd f;
            read(sd, "sd", f.sd);
            spec.user_sd = f;
        } else if (policy == "sampled") {
            SampledSd s;
            read(sd, "center_mean", s.center_mean);
            read(sd, "center_sd", s.center_sd);
            read(sd, "spread_mean", s.spread_mean);
            read(sd, "spread_sd", s.spread_sd);
            spec.user_sd = s;
        } else {
            throw InvalidInput(fmt::format("unknown user_sd policy '{}'", policy));
        }
    }
    if (const auto iso = node["isolated"]) {
        IsolatedUser u;
        read(iso, "index", u.index);
        read(iso, "sd", u.sd);
        spec.isolated = u;
    }
}

void read_train(const YAML::Node& node, TrainConfig& t) {
    read(node, "svm_c", t.svm_c);
    if (const auto g = node["rbf_gamma"]) t.rbf_gamma = g.as<double>();
    read(node, "svm_tolerance", t.svm_tolerance);
    read(node, "svm_max_iterations", t.svm_max_iterations);
    read(node, "tree_count", t.tree_count);
    read(node, "max_depth", t.max_depth);
    read(node, "mlp_hidden", t.mlp_hidden);
    read(node, "mlp_steps", t.mlp_steps);
    read(node, "mlp_batch", t.mlp_batch);
    read(node, "mlp_learning_rate", t.mlp_learning_rate);
    read(node, "mlp_initial_accumulator", t.mlp_initial_accumulator);
    read(node, "perceptron_epochs", t.perceptron_epochs);
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw IoError(fmt::format("config parse error: {}", e.what()));
    }
    ExperimentConfig c;
    try {
        if (const auto p = root["profile"]) apply_profile(c, p.as<std::string>());
        read(root, "experiment", c.experiment);
        read(root, "seed", c.seed);
        read(root, "repetitions", c.repetitions);
        read(root, "mc_samples", c.mc_samples);
        read(root, "thresholds", c.threshold_count);
        read(root, "eval_users", c.eval_users);
        read(root, "train_fraction", c.train_fraction);
        read(root, "grid", c.grid);
        read(root, "region_bins", c.region_bins);
        read(root, "region_cutoff", c.region_cutoff);
        if (const auto t = root["fixed_threshold"]) c.fixed_threshold = t.as<double>();
        if (const auto list = root["classifiers"]) {
            for (const auto& item : list) c.classifiers.push_back(parse_algorithm(item.as<std::string>()));
        }
        if (const auto d = root["dataset"]) c.dataset = d.as<std::string>();
        if (const auto a = root["aux"]) c.aux = a.as<std::string>();
        if (const auto p = root["population"]) read_population(p, c.population);
        if (const auto t = root["train"]) read_train(t, c.train);
    } catch (const YAML::Exception& e) {
        throw IoError(fmt::format("config value error: {}", e.what()));
    }
    if (c.repetitions == 0) throw InvalidInput("repetitions must be at least one");
    if (c.mc_samples == 0) throw InvalidInput("mc_samples must be at least one");
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

std::string dump_experiment_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "tool_version" << YAML::Value << std::string(kToolVersion);
    out << YAML::Key << "experiment" << YAML::Value << c.experiment;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "seed_scheme" << YAML::Value
        << "splitmix64 chain over (master seed; experiment, grid index, repetition, user, purpose)";
    out << YAML::Key << "repetitions" << YAML::Value << c.repetitions;
    out << YAML::Key << "mc_samples" << YAML::Value << c.mc_samples;
    out << YAML::Key << "thresholds" << YAML::Value << c.threshold_count;
    out << YAML::Key << "eval_users" << YAML::Value << c.eval_users;
    out << YAML::Key << "train_fraction" << YAML::Value << c.train_fraction;
    out << YAML::Key << "classifiers" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Algorithm a : c.classifiers) out << std::string(to_string(a));
    out << YAML::EndSeq;
    out << YAML::Key << "grid" << YAML::Value << YAML::Flow << c.grid;
    if (c.fixed_threshold) out << YAML::Key << "fixed_threshold" << YAML::Value << *c.fixed_threshold;
    out << YAML::Key << "region_bins" << YAML::Value << c.region_bins;
    out << YAML::Key << "region_cutoff" << YAML::Value << c.region_cutoff;
    if (c.dataset) out << YAML::Key << "dataset" << YAML::Value << c.dataset->string();
    if (c.aux) out << YAML::Key << "aux" << YAML::Value << c.aux->string();

    const auto& p = c.population;
    out << YAML::Key << "population" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "user_count" << YAML::Value << p.user_count;
    out << YAML::Key << "feature_count" << YAML::Value << p.feature_count;
    out << YAML::Key << "samples_per_user" << YAML::Value << p.samples_per_user;
    out << YAML::Key << "mean_of_means" << YAML::Value << p.mean_of_means;
    out << YAML::Key << "sd_of_means" << YAML::Value << p.sd_of_means;
    out << YAML::Key << "mean_of_sds" << YAML::Value << p.mean_of_sds;
    out << YAML::Key << "sd_of_sds" << YAML::Value << p.sd_of_sds;
    out << YAML::Key << "user_sd" << YAML::Value << YAML::BeginMap;
    if (const auto* f = std::get_if<FixedSd>(&p.user_sd)) {
        out << YAML::Key << "policy" << YAML::Value << "fixed";
        out << YAML::Key << "sd" << YAML::Value << f->sd;
    } else {
        const auto& s = std::get<SampledSd>(p.user_sd);
        out << YAML::Key << "policy" << YAML::Value << "sampled";
        out << YAML::Key << "center_mean" << YAML::Value << s.center_mean;
        out << YAML::Key << "center_sd" << YAML::Value << s.center_sd;
        out << YAML::Key << "spread_mean" << YAML::Value << s.spread_mean;
        out << YAML::Key << "spread_sd" << YAML::Value << s.spread_sd;
    }
    out << YAML::EndMap;
    if (p.isolated) {
        out << YAML::Key << "isolated" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "index" << YAML::Value << p.isolated->index;
        out << YAML::Key << "sd" << YAML::Value << p.isolated->sd;
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    const auto& t = c.train;
    out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "svm_c" << YAML::Value << t.svm_c;
    if (t.rbf_gamma) out << YAML::Key << "rbf_gamma" << YAML::Value << *t.rbf_gamma;
    out << YAML::Key << "svm_tolerance" << YAML::Value << t.svm_tolerance;
    out << YAML::Key << "svm_max_iterations" << YAML::Value << t.svm_max_iterations;
    out << YAML::Key << "tree_count" << YAML::Value << t.tree_count;
    out << YAML::Key << "max_depth" << YAML::Value << t.max_depth;
    out << YAML::Key << "mlp_hidden" << YAML::Value << YAML::Flow << t.mlp_hidden;
    out << YAML::Key << "mlp_steps" << YAML::Value << t.mlp_steps;
    out << YAML::Key << "mlp_batch" << YAML::Value << t.mlp_batch;
    out << YAML::Key << "mlp_learning_rate" << YAML::Value << t.mlp_learning_rate;
    out << YAML::Key << "mlp_initial_accumulator" << YAML::Value << t.mlp_initial_accumulator;
    out << YAML::Key << "perceptron_epochs" << YAML::Value << t.perceptron_epochs;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace araudit
