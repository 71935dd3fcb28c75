#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "araudit/error.hpp"
#include "araudit/harness.hpp"
#include "araudit/mitigation.hpp"
#include "araudit/model_io.hpp"
#include "araudit/region.hpp"
#include "araudit/synthgen.hpp"

namespace py = pybind11;
using namespace araudit;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> rows_of(const Matrix& x, std::size_t& n) {
    if (x.ndim() != 2) throw InvalidInput("expected a 2-D array");
    n = static_cast<std::size_t>(x.shape(1));
    return {x.data(), static_cast<std::size_t>(x.size())};
}

py::array_t<double> to_array(const std::vector<double>& v, std::size_t n) {
    py::array_t<double> out({v.size() / n, n});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

LabeledDataset dataset_from(const Matrix& x, const std::vector<int>& labels,
                            const std::vector<std::string>& users) {
    std::size_t n = 0;
    const auto rows = rows_of(x, n);
    const std::size_t m = n == 0 ? 0 : rows.size() / n;
    if (labels.size() != m) throw InvalidInput("labels must have one entry per row");
    if (!users.empty() && users.size() != m) throw InvalidInput("users must have one entry per row");
    LabeledDataset ds(n);
    for (std::size_t i = 0; i < m; ++i) {
        if (labels[i] != 1 && labels[i] != -1) throw InvalidInput("labels must be +1 or -1");
        ds.add(rows.subspan(i * n, n), labels[i] == 1 ? Label::Positive : Label::Negative,
               users.empty() ? (labels[i] == 1 ? "target" : "other") : users[i]);
    }
    return ds;
}

TrainConfig train_config(const std::string& algorithm, std::uint64_t seed, const py::dict& options) {
    TrainConfig t;
    t.algorithm = parse_algorithm(algorithm);
    t.seed = seed;
    for (const auto& [k, v] : options) {
        const auto key = k.cast<std::string>();
        if (key == "svm_c") t.svm_c = v.cast<double>();
        else if (key == "rbf_gamma") t.rbf_gamma = v.cast<double>();
        else if (key == "tree_count") t.tree_count = v.cast<std::size_t>();
        else if (key == "max_depth") t.max_depth = v.cast<std::size_t>();
        else if (key == "mlp_hidden") t.mlp_hidden = v.cast<std::vector<std::size_t>>();
        else if (key == "mlp_steps") t.mlp_steps = v.cast<std::size_t>();
        else if (key == "mlp_batch") t.mlp_batch = v.cast<std::size_t>();
        else if (key == "mlp_learning_rate") t.mlp_learning_rate = v.cast<double>();
        else if (key == "perceptron_epochs") t.perceptron_epochs = v.cast<std::size_t>();
        else throw InvalidInput("unknown training option '" + key + "'");
    }
    return t;
}

} // namespace

PYBIND11_MODULE(_araudit, m) {
    m.doc() = "Acceptance-region auditing for biometric classifiers";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_RuntimeError);

    py::class_<ScoringModel>(m, "Model")
        .def_property_readonly("algorithm", [](const ScoringModel& s) { return std::string(to_string(s.algorithm())); })
        .def_property_readonly("feature_count", &ScoringModel::feature_count)
        .def("score", [](const ScoringModel& s, const Matrix& x) {
            std::size_t n = 0;
            const auto rows = rows_of(x, n);
            if (n != s.feature_count()) throw InvalidInput("feature count does not match the model");
            py::array_t<double> out(rows.size() / n);
            s.score_rows(rows, {out.mutable_data(), static_cast<std::size_t>(out.size())});
            return out;
        }, py::arg("x"))
        .def("save", [](const ScoringModel& s, const std::filesystem::path& p) { save_model(p, s); })
        .def("dumps", [](const ScoringModel& s) {
            std::ostringstream out;
            save_model(out, s);
            return out.str();
        })
        .def(py::self == py::self);

    m.def("load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));

    m.def("train", [](const Matrix& x, const std::vector<int>& labels, const std::string& algorithm,
                      std::uint64_t seed, const py::dict& options) {
        return train_model(dataset_from(x, labels, {}), train_config(algorithm, seed, options));
    }, py::arg("x"), py::arg("labels"), py::arg("algorithm") = "linsvm", py::arg("seed") = 0,
       py::arg("options") = py::dict());

    m.def("generate_population", [](std::size_t users, std::size_t features, std::size_t samples,
                                    double user_sd, std::uint64_t seed) {
        PopulationSpec spec;
        spec.user_count = users;
        spec.feature_count = features;
        spec.samples_per_user = samples;
        spec.user_sd = FixedSd{user_sd};
        const Population pop = generate_population(spec, seed);
        py::dict out;
        for (const auto& u : pop.users) out[py::str(u.id)] = to_array(u.values, features);
        return out;
    }, py::arg("users") = 50, py::arg("features") = 50, py::arg("samples") = 200,
       py::arg("user_sd") = 0.2, py::arg("seed") = 1);

    m.def("threshold_grid", &make_threshold_grid, py::arg("count") = 100);

    m.def("acceptance_region", [](const ScoringModel& model, std::size_t samples, std::uint64_t seed,
                                  const std::vector<double>& thresholds, std::size_t workers) {
        const auto est = estimate_acceptance_region(model, samples, seed, thresholds, workers);
        std::vector<std::pair<double, double>> out;
        for (const auto& e : est) out.emplace_back(e.accept_fraction, e.standard_error);
        return out;
    }, py::arg("model"), py::arg("samples") = 1'000'000, py::arg("seed") = 1,
       py::arg("thresholds") = std::vector<double>{0.5}, py::arg("workers") = 1);

    m.def("region_volume", [](const Matrix& x, std::size_t bins, std::size_t cutoff, bool span) {
        std::size_t n = 0;
        const auto rows = rows_of(x, n);
        const auto r = measure_region_volume(rows, n, bins, cutoff, span ? VolumeMode::Span : VolumeMode::Binned);
        return py::make_tuple(r.alpha, r.log10_volume);
    }, py::arg("x"), py::arg("bins") = 100, py::arg("cutoff") = 0, py::arg("span") = false);

    m.def("beta_noise", [](const std::vector<double>& means, std::size_t count, std::uint64_t seed) {
        return to_array(beta_noise(means, count, seed), means.size());
    }, py::arg("means"), py::arg("count"), py::arg("seed") = 1);

    m.def("curves", [](const std::vector<double>& positive_scores, const std::vector<double>& negative_scores,
                       const std::vector<double>& ar, const std::vector<double>& thresholds) {
        const auto c = curves_from_scores(positive_scores, negative_scores, ar, thresholds);
        py::dict out;
        out["threshold"] = c.thresholds;
        out["frr"] = c.frr;
        out["fpr"] = c.fpr;
        out["ar"] = c.ar;
        out["eer_index"] = c.eer.index;
        return out;
    }, py::arg("positive_scores"), py::arg("negative_scores"), py::arg("ar"), py::arg("thresholds"));

    m.def("experiment_names", &experiment_names);

    m.def("run_experiment", [](const std::string& config_yaml, const std::filesystem::path& out_dir,
                               std::size_t workers) {
        ExperimentConfig c = parse_experiment_config(config_yaml);
        c.out_dir = out_dir;
        c.workers = workers;
        py::gil_scoped_release release;
        return run_experiment(c);
    }, py::arg("config_yaml"), py::arg("out_dir"), py::arg("workers") = 1);
}
