#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "araudit/csv.hpp"
#include "araudit/error.hpp"
#include "araudit/harness.hpp"
#include "araudit/mitigation.hpp"
#include "araudit/parallel.hpp"
#include "araudit/rng.hpp"

namespace araudit {

namespace {

std::string fixed(double v) { return fmt::format("{:.6f}", v); }
std::string exact(double v) { return fmt::format("{:.17g}", v); }

std::string clean(std::string s) {
    std::replace_if(s.begin(), s.end(), [](char ch) { return ch == ',' || ch == '\n' || ch == '\r'; },
                    ' ');
    return s;
}

class Output {
public:
    explicit Output(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_)) {
            throw IoError(fmt::format("cannot create output directory '{}'", dir_.string()));
        }
    }

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
        written_.push_back(path);
    }

    std::vector<std::filesystem::path> files() const { return written_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
};

// One evaluated operating point; units.csv holds one row per unit.
struct Unit {
    std::size_t grid_index = 0;
    double grid_value = 0.0;
    std::size_t repetition = 0;
    UserId user;
    std::string group;
    Algorithm classifier = Algorithm::LinearSvm;
    std::string variant;
    double threshold = 0.0;
    double frr = 0.0;
    double fpr = 0.0;
    double ar = 0.0;
    std::string error;
};

constexpr std::string_view kUnitsHeader =
    "grid_index,grid_value,repetition,user_id,group,classifier,variant,threshold,frr,fpr,ar,status\n";

std::string units_csv(const std::vector<Unit>& units) {
    std::string s(kUnitsHeader);
    for (const auto& u : units) {
        const bool ok = u.error.empty();
        s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", u.grid_index, exact(u.grid_value),
                         u.repetition, u.user, u.group, to_string(u.classifier), u.variant,
                         exact(u.threshold), ok ? exact(u.frr) : "nan", ok ? exact(u.fpr) : "nan",
                         ok ? exact(u.ar) : "nan", ok ? std::string("ok") : clean(u.error));
    }
    return s;
}

Unit unit_from(const UserEvaluationReport& r, std::size_t g, double gv, std::size_t rep,
               std::string group, std::string variant) {
    Unit u;
    u.grid_index = g;
    u.grid_value = gv;
    u.repetition = rep;
    u.user = r.user;
    u.group = std::move(group);
    u.classifier = r.classifier;
    u.variant = std::move(variant);
    u.error = r.error;
    if (r.ok()) {
        u.threshold = r.curve.eer.threshold;
        u.frr = r.curve.eer.frr;
        u.fpr = r.curve.eer.fpr;
        u.ar = r.curve.eer.ar;
    }
    return u;
}

struct Means {
    std::size_t count = 0;
    double frr = 0.0;
    double fpr = 0.0;
    double ar = 0.0;
};

// Means over successful units, accumulated in unit order.
template <class Pred>
Means mean_of(const std::vector<Unit>& units, Pred keep) {
    Means m;
    for (const auto& u : units) {
        if (!u.error.empty() || !keep(u)) continue;
        ++m.count;
        m.frr += u.frr;
        m.fpr += u.fpr;
        m.ar += u.ar;
    }
    if (m.count > 0) {
        const auto c = static_cast<double>(m.count);
        m.frr /= c;
        m.fpr /= c;
        m.ar /= c;
    } else {
        m.frr = m.fpr = m.ar = std::nan("");
    }
    return m;
}

EvalConfig eval_config(const ExperimentConfig& c, std::size_t repetitions) {
    EvalConfig e;
    e.train_fraction = c.train_fraction;
    e.mc_samples = c.mc_samples;
    e.repetitions = repetitions;
    e.threshold_count = c.threshold_count;
    e.fixed_threshold = c.fixed_threshold;
    e.region_bins = c.region_bins;
    e.region_cutoff = c.region_cutoff;
    e.workers = 1;
    return e;
}

std::uint64_t cell_seed(const ExperimentConfig& c, std::size_t g, std::size_t r) {
    return derive_seed(c.seed, {hash_tag(c.experiment), g, r});
}

Population base_population(const ExperimentConfig& c, const PopulationSpec& spec,
                           std::uint64_t cell) {
    if (c.dataset) return group_by_user(read_dataset_csv(*c.dataset));
    return generate_population(spec, derive_seed(cell, {hash_tag("population")}), c.workers);
}

std::size_t limit(std::size_t want, std::size_t have) { return want == 0 ? have : std::min(want, have); }

std::vector<UserId> pick_targets(const Population& pop, std::size_t eval_users,
                                 std::optional<std::size_t> skip = std::nullopt) {
    std::vector<UserId> out;
    for (std::size_t u = 0; u < pop.users.size() && out.size() < limit(eval_users, pop.users.size());
         ++u) {
        if (skip && *skip == u) continue;
        out.push_back(pop.users[u].id);
    }
    return out;
}

struct Job {
    UserId user;
    Algorithm classifier;
    bool mitigation = false;
};

// Evaluates every job on one prepared population; results keep job order.
std::vector<UserEvaluationReport> run_jobs(const PreparedPopulation& prep,
                                           const std::vector<Job>& jobs, const ExperimentConfig& c,
                                           const EvalConfig& base, std::uint64_t cell,
                                           const std::optional<LabeledDataset>& aux) {
    std::vector<UserEvaluationReport> out(jobs.size());
    parallel_for(jobs.size(), c.workers, [&](std::size_t k) {
        const Job& job = jobs[k];
        TrainConfig train = c.train;
        train.algorithm = job.classifier;
        EvalConfig eval = base;
        eval.mitigation = job.mitigation;
        if (job.mitigation) eval.aux_negatives = aux;
        // normal and mitigated runs of a user share their seed
        const std::uint64_t seed = derive_seed(
            cell, {hash_tag(job.user), static_cast<std::uint64_t>(job.classifier)});
        out[k] = evaluate_user(prep, job.user, train, eval, seed);
    });
    return out;
}

std::vector<Job> cross(const std::vector<UserId>& users, const std::vector<Algorithm>& clfs,
                       bool mitigation = false) {
    std::vector<Job> jobs;
    for (const auto& u : users) {
        for (Algorithm a : clfs) jobs.push_back({u, a, mitigation});
    }
    return jobs;
}

std::optional<LabeledDataset> load_aux(const ExperimentConfig& c, const NormalizationParams& params) {
    if (!c.aux) return std::nullopt;
    const LabeledDataset raw = read_dataset_csv(*c.aux);
    LabeledDataset aux(raw.feature_count());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        aux.add(params.transform(raw.row(i)), Label::Negative, kAuxUser);
    }
    return aux;
}

std::string curve_csv(const ThresholdCurve& curve) {
    std::string s = "threshold,frr,fpr,ar\n";
    for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
        s += fmt::format("{},{},{},{}\n", fixed(curve.thresholds[k]), fixed(curve.frr[k]),
                         fixed(curve.fpr[k]), fixed(curve.ar[k]));
    }
    return s;
}

std::string eer_csv(const EerPoint& e) {
    return fmt::format("eer_index,frr_at_eer,fpr_at_eer,ar_at_eer,eer_discrepancy\n{},{},{},{},{}\n",
                       e.index, fixed(e.frr), fixed(e.fpr), fixed(e.ar), fixed(e.discrepancy));
}

// Pointwise mean of the successful reports' curves, EER located on the mean.
std::optional<ThresholdCurve> average_curve(const std::vector<const UserEvaluationReport*>& reports) {
    ThresholdCurve avg;
    std::size_t n = 0;
    for (const auto* r : reports) {
        if (!r->ok()) continue;
        if (n == 0) {
            avg.thresholds = r->curve.thresholds;
            avg.frr.assign(avg.thresholds.size(), 0.0);
            avg.fpr.assign(avg.thresholds.size(), 0.0);
            avg.ar.assign(avg.thresholds.size(), 0.0);
        }
        for (std::size_t k = 0; k < avg.thresholds.size(); ++k) {
            avg.frr[k] += r->curve.frr[k];
            avg.fpr[k] += r->curve.fpr[k];
            avg.ar[k] += r->curve.ar[k];
        }
        ++n;
    }
    if (n == 0) return std::nullopt;
    for (std::size_t k = 0; k < avg.thresholds.size(); ++k) {
        avg.frr[k] /= static_cast<double>(n);
        avg.fpr[k] /= static_cast<double>(n);
        avg.ar[k] /= static_cast<double>(n);
    }
    avg.eer = find_eer(avg);
    return avg;
}

std::string failures_text(const std::vector<Unit>& units) {
    std::string s;
    for (const auto& u : units) {
        if (u.error.empty()) continue;
        s += fmt::format("  failed: grid {} rep {} user {} {} {}: {}\n", u.grid_index, u.repetition,
                         u.user, to_string(u.classifier), u.variant, u.error);
    }
    return s;
}

std::string summary_header(const ExperimentConfig& c, const std::string& title) {
    std::string s = fmt::format("{}\n{}\n", title, std::string(title.size(), '='));
    s += fmt::format("tool: {}\nexperiment: {}\nseed: {}\nprofile: {}\n", kToolVersion, c.experiment,
                     c.seed, c.profile);
    s += fmt::format("repetitions: {}  mc_samples: {}  thresholds: {}\n", c.repetitions,
                     c.mc_samples, c.fixed_threshold ? std::string("fixed ") + fixed(*c.fixed_threshold)
                                                     : std::to_string(c.threshold_count));
    return s + "\n";
}

void finish(Output& out, const ExperimentConfig& c, const std::vector<Unit>& units,
            const std::string& summary) {
    out.write("units.csv", units_csv(units));
    out.write("manifest.yaml", dump_experiment_config(c));
    out.write("summary.txt", summary + failures_text(units));
}

// per-user-ar, roc-curves, mitigation: one population, repetitions inside each user.
std::vector<std::filesystem::path> run_per_user(const ExperimentConfig& c) {
    const std::uint64_t cell = cell_seed(c, 0, 0);
    const Population raw = base_population(c, c.population, cell);
    const PreparedPopulation prep =
        prepare_population(raw, c.train_fraction, derive_seed(cell, {hash_tag("split")}));
    const auto users = pick_targets(prep.normalized, c.eval_users);
    const EvalConfig eval = eval_config(c, c.repetitions);

    if (c.experiment != "mitigation") {
        const auto reports = run_jobs(prep, cross(users, c.classifiers), c, eval, cell, std::nullopt);
        auto files = emit_report(reports, c, c.experiment);
        if (c.experiment == "roc-curves") {
            Output out(c.out_dir);
            for (Algorithm a : c.classifiers) {
                std::vector<const UserEvaluationReport*> mine;
                for (const auto& r : reports) {
                    if (r.classifier == a) mine.push_back(&r);
                }
                const auto avg = average_curve(mine);
                if (!avg) continue;
                out.write(fmt::format("average_{}.csv", to_string(a)), curve_csv(*avg));
                out.write(fmt::format("eer_{}.csv", to_string(a)), eer_csv(avg->eer));
            }
            const auto extra = out.files();
            files.insert(files.end(), extra.begin(), extra.end());
        }
        return files;
    }

    const auto aux = load_aux(c, prep.params);
    auto jobs = cross(users, c.classifiers, false);
    const auto mitigated = cross(users, c.classifiers, true);
    jobs.insert(jobs.end(), mitigated.begin(), mitigated.end());
    const auto reports = run_jobs(prep, jobs, c, eval, cell, aux);

    std::vector<Unit> units;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        units.push_back(unit_from(reports[k], 0, 0.0, 0, "user",
                                  jobs[k].mitigation ? "mitigated" : "normal"));
    }
    Output out(c.out_dir);
    std::string table =
        "classifier,users,fpr_normal,ar_normal,fpr_mitigated,ar_mitigated,delta_fpr,delta_ar\n";
    std::string summary = summary_header(c, "Beta-noise mitigation");
    summary += fmt::format("{:<12}{:>12}{:>12}{:>12}{:>12}\n", "classifier", "FPR", "AR", "FPR(mit)",
                           "AR(mit)");
    for (Algorithm a : c.classifiers) {
        const auto normal = mean_of(units, [&](const Unit& u) {
            return u.classifier == a && u.variant == "normal";
        });
        const auto mit = mean_of(units, [&](const Unit& u) {
            return u.classifier == a && u.variant == "mitigated";
        });
        table += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(a), std::min(normal.count, mit.count),
                             fixed(normal.fpr), fixed(normal.ar), fixed(mit.fpr), fixed(mit.ar),
                             fixed(mit.fpr - normal.fpr), fixed(mit.ar - normal.ar));
        summary += fmt::format("{:<12}{:>12}{:>12}{:>12}{:>12}\n", to_string(a), fixed(normal.fpr),
                               fixed(normal.ar), fixed(mit.fpr), fixed(mit.ar));
    }
    out.write("mitigation.csv", table);
    finish(out, c, units, summary);
    return out.files();
}

// isolated-variance, population-variance: fixed threshold, population regenerated per repetition.
std::vector<std::filesystem::path> run_variance_sweep(const ExperimentConfig& c) {
    const bool isolated_sweep = c.experiment == "isolated-variance";
    const auto points = isolated_sweep ? make_isolated_variance_config(c.grid, c.population)
                                       : make_population_variance_config(c.grid, c.population);
    const EvalConfig eval = eval_config(c, 1);

    std::vector<Unit> units;
    for (std::size_t g = 0; g < points.size(); ++g) {
        const auto& point = points[g];
        const std::size_t iso = point.spec.isolated->index;
        for (std::size_t r = 0; r < c.repetitions; ++r) {
            const std::uint64_t cell = cell_seed(c, g, r);
            const PreparedPopulation prep = prepare_population(
                generate_population(point.spec, derive_seed(cell, {hash_tag("population")}), c.workers),
                c.train_fraction, derive_seed(cell, {hash_tag("split")}));
            std::vector<UserId> users{prep.normalized.users[iso].id};
            const auto others = pick_targets(prep.normalized, c.eval_users, iso);
            users.insert(users.end(), others.begin(), others.end());
            const auto reports = run_jobs(prep, cross(users, c.classifiers), c, eval, cell, std::nullopt);
            for (const auto& rep : reports) {
                units.push_back(unit_from(rep, g, point.grid_value, r,
                                          rep.user == users.front() ? "isolated" : "system", "normal"));
            }
        }
    }

    Output out(c.out_dir);
    std::string series =
        "classifier,grid_index,grid_value,relative_sd,system_ar,system_frr,system_fpr,isolated_ar,"
        "isolated_frr,isolated_fpr\n";
    std::string summary = summary_header(
        c, isolated_sweep ? "Isolated-user variance sweep" : "Population variance sweep");
    summary += fmt::format("{:<10}{:>8}{:>12}{:>12}{:>12}{:>12}\n", "classifier", "rel_sd",
                           "system_AR", "system_FPR", "isolated_AR", "isolated_FPR");
    for (Algorithm a : c.classifiers) {
        for (std::size_t g = 0; g < points.size(); ++g) {
            const auto sys = mean_of(units, [&](const Unit& u) {
                return u.classifier == a && u.grid_index == g && u.group == "system";
            });
            const auto iso = mean_of(units, [&](const Unit& u) {
                return u.classifier == a && u.grid_index == g && u.group == "isolated";
            });
            series += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(a), g,
                                  fixed(points[g].grid_value), fixed(points[g].relative_sd),
                                  fixed(sys.ar), fixed(sys.frr), fixed(sys.fpr), fixed(iso.ar),
                                  fixed(iso.frr), fixed(iso.fpr));
            summary += fmt::format("{:<10}{:>8}{:>12}{:>12}{:>12}{:>12}\n", to_string(a),
                                   fmt::format("{:.2f}", points[g].relative_sd), fixed(sys.ar),
                                   fixed(sys.fpr), fixed(iso.ar), fixed(iso.fpr));
        }
    }
    out.write("series.csv", series);
    finish(out, c, units, summary);
    return out.files();
}

// distance-classifier, vary-users: threshold sweep, curves averaged over users and repetitions.
std::vector<std::filesystem::path> run_curve_sweep(const ExperimentConfig& c) {
    const bool vary = c.experiment == "vary-users";
    std::vector<double> grid = vary ? c.grid : std::vector<double>{0.0};
    const EvalConfig eval = eval_config(c, 1);

    std::vector<Unit> units;
    // averaged curve per (grid point, classifier)
    std::vector<std::vector<std::optional<ThresholdCurve>>> curves(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        PopulationSpec spec = make_distance_classifier_spec(c.population);
        if (vary) {
            if (grid[g] < 2.0 || grid[g] != std::floor(grid[g])) {
                throw InvalidInput(fmt::format("user count {} is not an integer >= 2", grid[g]));
            }
            spec.user_count = static_cast<std::size_t>(grid[g]);
        }
        std::vector<UserEvaluationReport> all;
        for (std::size_t r = 0; r < c.repetitions; ++r) {
            const std::uint64_t cell = cell_seed(c, g, r);
            const PreparedPopulation prep = prepare_population(
                base_population(c, spec, cell), c.train_fraction, derive_seed(cell, {hash_tag("split")}));
            const auto users = pick_targets(prep.normalized, c.eval_users);
            auto reports = run_jobs(prep, cross(users, c.classifiers), c, eval, cell, std::nullopt);
            for (auto& rep : reports) {
                units.push_back(unit_from(rep, g, grid[g], r, "user", "normal"));
                all.push_back(std::move(rep));
            }
        }
        for (Algorithm a : c.classifiers) {
            std::vector<const UserEvaluationReport*> mine;
            for (const auto& r : all) {
                if (r.classifier == a) mine.push_back(&r);
            }
            curves[g].push_back(average_curve(mine));
        }
    }

    Output out(c.out_dir);
    std::string series = vary ? "classifier,users,eer_index,threshold,frr_at_eer,fpr_at_eer,ar_at_eer,"
                                "eer_discrepancy\n"
                              : "classifier,eer_index,threshold,frr_at_eer,fpr_at_eer,ar_at_eer,"
                                "eer_discrepancy\n";
    std::string summary = summary_header(
        c, vary ? "User-count sweep" : "Distance classifier against ML classifiers");
    summary += fmt::format("{:<10}{:>8}{:>12}{:>12}{:>12}\n", "classifier", vary ? "users" : "",
                           "FRR@EER", "FPR@EER", "AR@EER");
    for (std::size_t k = 0; k < c.classifiers.size(); ++k) {
        const auto tag = to_string(c.classifiers[k]);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto& curve = curves[g][k];
            if (!curve) continue;
            const auto& e = curve->eer;
            const std::string users = vary ? fmt::format("{},", static_cast<std::size_t>(grid[g])) : "";
            series += fmt::format("{},{}{},{},{},{},{},{}\n", tag, users, e.index, fixed(e.threshold),
                                  fixed(e.frr), fixed(e.fpr), fixed(e.ar), fixed(e.discrepancy));
            summary += fmt::format("{:<10}{:>8}{:>12}{:>12}{:>12}\n", tag,
                                   vary ? std::to_string(static_cast<std::size_t>(grid[g])) : "",
                                   fixed(e.frr), fixed(e.fpr), fixed(e.ar));
            if (!vary) {
                out.write(fmt::format("average_{}.csv", tag), curve_csv(*curve));
                out.write(fmt::format("eer_{}.csv", tag), eer_csv(e));
            }
        }
    }
    out.write("series.csv", series);
    finish(out, c, units, summary);
    return out.files();
}

std::vector<std::filesystem::path> run_propositions(const ExperimentConfig& c) {
    constexpr std::size_t kFeatures = 10;
    constexpr std::size_t kPerClass = 200;
    const std::vector<double> grid{0.5};
    std::vector<Unit> units;
    std::string table =
        "repetition,features,train_frr,train_fpr,test_frr,test_fpr,ar,ar_standard_error,mc_samples,"
        "converged,updates\n";
    for (std::size_t r = 0; r < c.repetitions; ++r) {
        const std::uint64_t cell = cell_seed(c, 0, r);
        const auto train = make_half_space_dataset(kFeatures, kPerClass, derive_seed(cell, {hash_tag("train")}));
        const auto test = make_half_space_dataset(kFeatures, kPerClass, derive_seed(cell, {hash_tag("test")}));
        TrainConfig cfg = c.train;
        cfg.algorithm = Algorithm::Perceptron;
        cfg.seed = derive_seed(cell, {hash_tag("model")});
        const ScoringModel model = train_perceptron(train, cfg, half_space_initialization(kFeatures));
        const auto ar = estimate_acceptance_region(model, c.mc_samples,
                                                   derive_seed(cell, {hash_tag("mc")}), grid, c.workers);
        const auto on_train = evaluate_curves(model, train, ar, grid);
        const auto on_test = evaluate_curves(model, test, ar, grid);
        const auto& p = model.as<PerceptronModel>();
        table += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r, kFeatures, fixed(on_train.frr[0]),
                             fixed(on_train.fpr[0]), fixed(on_test.frr[0]), fixed(on_test.fpr[0]),
                             fixed(ar[0].accept_fraction), fixed(ar[0].standard_error), c.mc_samples,
                             p.converged ? 1 : 0, p.updates);
        Unit u;
        u.repetition = r;
        u.user = "pos";
        u.group = "half-space";
        u.classifier = Algorithm::Perceptron;
        u.variant = "test";
        u.threshold = 0.5;
        u.frr = on_test.frr[0];
        u.fpr = on_test.fpr[0];
        u.ar = ar[0].accept_fraction;
        units.push_back(u);
    }
    const auto m = mean_of(units, [](const Unit&) { return true; });
    std::string summary = summary_header(c, "Half-space perceptron");
    summary += fmt::format("mean test FRR {}  FPR {}  AR {} (expected 0.5)\n", fixed(m.frr),
                           fixed(m.fpr), fixed(m.ar));
    Output out(c.out_dir);
    out.write("propositions.csv", table);
    finish(out, c, units, summary);
    return out.files();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace

std::vector<std::filesystem::path> emit_report(const std::vector<UserEvaluationReport>& reports,
                                               const ExperimentConfig& config,
                                               const std::string& summary_title) {
    if (reports.empty()) throw InvalidInput("no reports to emit");
    Output out(config.out_dir);
    std::string per_user =
        "user_id,classifier,eer_index,threshold,frr_at_eer,fpr_at_eer,ar_at_eer,eer_discrepancy,"
        "log10_positive_region,log10_negative_region,status\n";
    std::string scatter = "user_id,classifier,fpr_at_eer,ar_at_eer\n";
    std::vector<Unit> units;
    for (const auto& r : reports) {
        units.push_back(unit_from(r, 0, 0.0, 0, "user", "normal"));
        if (!r.ok()) {
            per_user += fmt::format("{},{},,,,,,,,,{}\n", r.user, to_string(r.classifier), clean(r.error));
            continue;
        }
        const auto& e = r.curve.eer;
        per_user += fmt::format("{},{},{},{},{},{},{},{},{},{},ok\n", r.user, to_string(r.classifier),
                                e.index, fixed(e.threshold), fixed(e.frr), fixed(e.fpr), fixed(e.ar),
                                fixed(e.discrepancy), fixed(r.log10_positive_region),
                                fixed(r.log10_negative_region));
        scatter += fmt::format("{},{},{},{}\n", r.user, to_string(r.classifier), fixed(e.fpr),
                               fixed(e.ar));
    }
    out.write("per_user.csv", per_user);
    out.write("scatter.csv", scatter);

    std::vector<Algorithm> seen;
    for (const auto& r : reports) {
        if (std::find(seen.begin(), seen.end(), r.classifier) == seen.end()) seen.push_back(r.classifier);
    }
    std::string summary = summary_header(config, summary_title);
    summary += fmt::format("{:<12}{:>7}{:>12}{:>12}{:>12}\n", "classifier", "users", "FRR@EER",
                           "FPR@EER", "AR@EER");
    for (Algorithm a : seen) {
        const auto m = mean_of(units, [&](const Unit& u) { return u.classifier == a; });
        summary += fmt::format("{:<12}{:>7}{:>12}{:>12}{:>12}\n", to_string(a), m.count, fixed(m.frr),
                               fixed(m.fpr), fixed(m.ar));
    }
    finish(out, config, units, summary);
    return out.files();
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& input) {
    ExperimentConfig c = input;
    apply_experiment_defaults(c);
    if (c.repetitions == 0) throw InvalidInput("repetitions must be at least one");
    if (c.mc_samples == 0) throw InvalidInput("mc_samples must be at least one");
    if (c.workers == 0) c.workers = 1;

    const std::string& e = c.experiment;
    if (e == "per-user-ar" || e == "roc-curves" || e == "mitigation") return run_per_user(c);
    if (e == "isolated-variance" || e == "population-variance") return run_variance_sweep(c);
    if (e == "distance-classifier" || e == "vary-users") return run_curve_sweep(c);
    return run_propositions(c);
}

std::filesystem::path aggregate_units(const std::filesystem::path& dir) {
    const auto path = dir / "units.csv";
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::string line;
    if (!std::getline(in, line) || line + "\n" != kUnitsHeader) {
        throw IoError(fmt::format("'{}' is not a units file", path.string()));
    }

    struct Group {
        std::string key;
        std::size_t count = 0;
        std::size_t failed = 0;
        double frr = 0.0;
        double fpr = 0.0;
        double ar = 0.0;
    };
    std::vector<Group> groups;
    std::map<std::string, std::size_t> index;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 12) throw IoError(fmt::format("malformed units row '{}'", line));
        const std::string key =
            fmt::format("{},{},{},{},{}", cells[0], cells[1], cells[4], cells[5], cells[6]);
        auto [it, fresh] = index.emplace(key, groups.size());
        if (fresh) groups.push_back({key});
        Group& g = groups[it->second];
        if (cells[11] != "ok") {
            ++g.failed;
            continue;
        }
        ++g.count;
        g.frr += std::stod(cells[8]);
        g.fpr += std::stod(cells[9]);
        g.ar += std::stod(cells[10]);
    }

    std::string out = "grid_index,grid_value,group,classifier,variant,count,failed,frr,fpr,ar\n";
    for (auto& g : groups) {
        const double n = static_cast<double>(g.count);
        const auto val = [&](double s) { return g.count ? fixed(s / n) : std::string("nan"); };
        out += fmt::format("{},{},{},{},{},{}\n", g.key, g.count, g.failed, val(g.frr), val(g.fpr),
                           val(g.ar));
    }
    const auto target = dir / "report.csv";
    std::ofstream o(target, std::ios::binary | std::ios::trunc);
    o << out;
    if (!o) throw IoError(fmt::format("cannot write '{}'", target.string()));
    return target;
}

} // namespace araudit
