#include "araudit/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "araudit/error.hpp"

namespace araudit {

namespace {

constexpr int kFormatVersion = 1;

void put_reals(std::ostream& out, std::string_view key, std::span<const double> values) {
    fmt::print(out, "{} {}", key, values.size());
    for (double v : values) fmt::print(out, " {:a}", v);
    out << '\n';
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string token() {
        std::string t;
        if (!(in_ >> t)) throw IoError("model file ended unexpectedly");
        return t;
    }
    void expect(std::string_view key) {
        const std::string t = token();
        if (t != key) throw IoError(fmt::format("model file: expected '{}', found '{}'", key, t));
    }
    double real() {
        const std::string t = token();
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size()) throw IoError(fmt::format("model file: bad real '{}'", t));
        return v;
    }
    std::size_t count() {
        const std::string t = token();
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(t, &pos);
            if (pos != t.size()) throw IoError("");
            return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw IoError(fmt::format("model file: bad count '{}'", t));
        }
    }
    long long integer() {
        const std::string t = token();
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(t, &pos);
            if (pos != t.size()) throw IoError("");
            return v;
        } catch (const std::exception&) {
            throw IoError(fmt::format("model file: bad integer '{}'", t));
        }
    }
    std::vector<double> reals(std::string_view key) {
        expect(key);
        std::vector<double> v(count());
        for (double& x : v) x = real();
        return v;
    }

private:
    std::istream& in_;
};

struct Writer {
    std::ostream& out;

    void operator()(const PerceptronModel& m) const {
        fmt::print(out, "converged {}\nupdates {}\n", m.converged ? 1 : 0, m.updates);
        put_reals(out, "w", m.params.w);
        fmt::print(out, "b {:a}\n", m.params.b);
    }
    void operator()(const LinearSvmModel& m) const {
        put_reals(out, "w", m.params.w);
        fmt::print(out, "b {:a}\n", m.params.b);
    }
    void operator()(const RbfSvmModel& m) const {
        fmt::print(out, "gamma {:a}\nbias {:a}\n", m.gamma, m.bias);
        put_reals(out, "coef", m.coef);
        put_reals(out, "support", m.support);
    }
    void operator()(const RandomForestModel& m) const {
        fmt::print(out, "trees {}\n", m.trees.size());
        for (const auto& t : m.trees) {
            fmt::print(out, "tree {}\n", t.nodes.size());
            for (const auto& node : t.nodes) {
                fmt::print(out, "{} {:a} {} {} {}\n", node.feature, node.threshold, node.left,
                           node.right, static_cast<int>(node.vote));
            }
        }
    }
    void operator()(const MlpModel& m) const {
        fmt::print(out, "layers {}\n", m.layers.size());
        for (const auto& layer : m.layers) {
            fmt::print(out, "layer {} {}\n", layer.inputs, layer.outputs);
            put_reals(out, "weights", layer.weights);
            put_reals(out, "bias", layer.bias);
        }
    }
    void operator()(const CosineModel& m) const { put_reals(out, "template", m.templ); }
};

ScoringModel::Params read_params(Reader& r, Algorithm algorithm, std::size_t n) {
    switch (algorithm) {
    case Algorithm::Perceptron: {
        PerceptronModel m;
        r.expect("converged");
        m.converged = r.count() != 0;
        r.expect("updates");
        m.updates = r.count();
        m.params.w = r.reals("w");
        r.expect("b");
        m.params.b = r.real();
        return m;
    }
    case Algorithm::LinearSvm: {
        LinearSvmModel m;
        m.params.w = r.reals("w");
        r.expect("b");
        m.params.b = r.real();
        return m;
    }
    case Algorithm::RbfSvm: {
        RbfSvmModel m;
        m.feature_count = n;
        r.expect("gamma");
        m.gamma = r.real();
        r.expect("bias");
        m.bias = r.real();
        m.coef = r.reals("coef");
        m.support = r.reals("support");
        if (m.support.size() != m.coef.size() * n) throw IoError("model file: support block size");
        return m;
    }
    case Algorithm::RandomForest: {
        RandomForestModel m;
        r.expect("trees");
        m.trees.resize(r.count());
        for (auto& t : m.trees) {
            r.expect("tree");
            t.nodes.resize(r.count());
            for (auto& node : t.nodes) {
                node.feature = static_cast<std::int32_t>(r.integer());
                node.threshold = r.real();
                node.left = static_cast<std::uint32_t>(r.count());
                node.right = static_cast<std::uint32_t>(r.count());
                node.vote = static_cast<std::int8_t>(r.integer());
                if (node.feature >= static_cast<std::int32_t>(n) ||
                    (node.feature >= 0 && (node.left >= t.nodes.size() ||
                                           node.right >= t.nodes.size()))) {
                    throw IoError("model file: malformed tree node");
                }
            }
            if (t.nodes.empty()) throw IoError("model file: empty tree");
        }
        if (m.trees.empty()) throw IoError("model file: forest has no trees");
        return m;
    }
    case Algorithm::Mlp: {
        MlpModel m;
        r.expect("layers");
        m.layers.resize(r.count());
        for (auto& layer : m.layers) {
            r.expect("layer");
            layer.inputs = r.count();
            layer.outputs = r.count();
            layer.weights = r.reals("weights");
            layer.bias = r.reals("bias");
            if (layer.weights.size() != layer.inputs * layer.outputs ||
                layer.bias.size() != layer.outputs) {
                throw IoError("model file: layer shape mismatch");
            }
        }
        if (m.layers.empty() || m.layers.front().inputs != n || m.layers.back().outputs != 1) {
            throw IoError("model file: MLP shape mismatch");
        }
        return m;
    }
    case Algorithm::Cosine: return CosineModel{r.reals("template")};
    }
    throw IoError("model file: unknown algorithm");
}

} // namespace

void save_model(std::ostream& out, const ScoringModel& model) {
    fmt::print(out, "araudit-model {}\nalgorithm {}\nfeatures {}\n", kFormatVersion,
               to_string(model.algorithm()), model.feature_count());
    std::visit(Writer{out}, model.params());
    out << "end\n";
}

void save_model(const std::filesystem::path& path, const ScoringModel& model) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    save_model(out, model);
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

ScoringModel load_model(std::istream& in) {
    Reader r(in);
    r.expect("araudit-model");
    const std::size_t version = r.count();
    if (version != kFormatVersion) {
        throw IoError(fmt::format("unsupported model format version {}", version));
    }
    r.expect("algorithm");
    Algorithm algorithm{};
    try {
        algorithm = parse_algorithm(r.token());
    } catch (const InvalidInput& e) {
        throw IoError(e.what());
    }
    r.expect("features");
    const std::size_t n = r.count();
    if (n == 0) throw IoError("model file: zero features");
    auto params = read_params(r, algorithm, n);
    r.expect("end");
    return ScoringModel(std::move(params), n);
}

ScoringModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    return load_model(in);
}

} // namespace araudit
