#include "araudit/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "araudit/error.hpp"
#include "araudit/mlp.hpp"

namespace araudit {

std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
    case Algorithm::Perceptron: return "perceptron";
    case Algorithm::LinearSvm: return "linsvm";
    case Algorithm::RbfSvm: return "rbfsvm";
    case Algorithm::RandomForest: return "rndf";
    case Algorithm::Mlp: return "mlp";
    case Algorithm::Cosine: return "cosine";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view tag) {
    for (Algorithm a : {Algorithm::Perceptron, Algorithm::LinearSvm, Algorithm::RbfSvm,
                        Algorithm::RandomForest, Algorithm::Mlp, Algorithm::Cosine}) {
        if (to_string(a) == tag) return a;
    }
    throw InvalidInput(fmt::format(
        "unknown classifier '{}' (expected perceptron|linsvm|rbfsvm|rndf|mlp|cosine)", tag));
}

void TrainConfig::validate() const {
    if (!(svm_c > 0.0)) throw InvalidInput("SVM penalty C must be positive");
    if (rbf_gamma && !(*rbf_gamma > 0.0)) throw InvalidInput("RBF gamma must be positive");
    if (!(svm_tolerance > 0.0) || svm_max_iterations == 0) {
        throw InvalidInput("SVM tolerance and iteration limit must be positive");
    }
    if (tree_count == 0) throw InvalidInput("tree count must be positive");
    if (mlp_steps == 0 || mlp_batch == 0 || !(mlp_learning_rate > 0.0) ||
        !(mlp_initial_accumulator > 0.0)) {
        throw InvalidInput("MLP step count, batch size, learning rate and accumulator must be positive");
    }
    for (std::size_t h : mlp_hidden) {
        if (h == 0) throw InvalidInput("MLP layer widths must be positive");
    }
    if (perceptron_epochs == 0) throw InvalidInput("perceptron epoch limit must be positive");
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    const std::size_t n = a.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

double logistic(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double RbfSvmModel::decision(std::span<const double> x) const {
    const std::size_t n = feature_count;
    double sum = 0.0;
    for (std::size_t k = 0; k < coef.size(); ++k) {
        const double* sv = support.data() + k * n;
        double d0 = 0.0, d1 = 0.0;
        std::size_t i = 0;
        for (; i + 2 <= n; i += 2) {
            const double a = sv[i] - x[i];
            const double b = sv[i + 1] - x[i + 1];
            d0 += a * a;
            d1 += b * b;
        }
        for (; i < n; ++i) d0 += (sv[i] - x[i]) * (sv[i] - x[i]);
        sum += coef[k] * std::exp(-gamma * (d0 + d1));
    }
    return sum + bias;
}

int DecisionTree::vote(std::span<const double> x) const {
    std::uint32_t at = 0;
    while (nodes[at].feature >= 0) {
        const auto& node = nodes[at];
        at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[at].vote;
}

std::size_t DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [at, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes[at].feature >= 0) {
            stack.push_back({nodes[at].left, d + 1});
            stack.push_back({nodes[at].right, d + 1});
        }
    }
    return deepest;
}

ScoringModel::ScoringModel(Params params, std::size_t feature_count)
    : params_(std::move(params)), feature_count_(feature_count) {
    if (feature_count_ == 0) throw InvalidInput("model needs a positive feature count");
}

Algorithm ScoringModel::algorithm() const noexcept {
    constexpr Algorithm tags[] = {Algorithm::Perceptron,   Algorithm::LinearSvm,
                                  Algorithm::RbfSvm,       Algorithm::RandomForest,
                                  Algorithm::Mlp,          Algorithm::Cosine};
    return tags[params_.index()];
}

double ScoringModel::score(std::span<const double> x) const {
    if (x.size() != feature_count_) {
        throw InvalidInput(fmt::format("model expects {} features, got {}", feature_count_,
                                       x.size()));
    }
    return score_unchecked(x);
}

namespace {

struct ScoreVisitor {
    std::span<const double> x;

    double operator()(const PerceptronModel& m) const {
        return dot(m.params.w, x) + m.params.b > 0.0 ? 1.0 : 0.0;
    }
    double operator()(const LinearSvmModel& m) const {
        return logistic(dot(m.params.w, x) + m.params.b);
    }
    double operator()(const RbfSvmModel& m) const { return logistic(m.decision(x)); }
    double operator()(const RandomForestModel& m) const {
        std::size_t positive = 0;
        for (const auto& t : m.trees) positive += t.vote(x) > 0 ? 1 : 0;
        return static_cast<double>(positive) / static_cast<double>(m.trees.size());
    }
    double operator()(const MlpModel& m) const { return logistic(mlp_logit(m, x)); }
    double operator()(const CosineModel& m) const {
        const double xx = dot(x, x);
        if (xx == 0.0) return 0.0;
        const double c = dot(x, m.templ) / std::sqrt(xx * dot(m.templ, m.templ));
        return (std::clamp(c, -1.0, 1.0) + 1.0) / 2.0;
    }
};

} // namespace

double ScoringModel::score_unchecked(std::span<const double> x) const {
    const double s = std::visit(ScoreVisitor{x}, params_);
    return std::clamp(s, 0.0, 1.0);
}

void ScoringModel::score_rows(std::span<const double> rows, std::span<double> out) const {
    const std::size_t n = feature_count_;
    if (rows.size() != out.size() * n) throw InvalidInput("score_rows: size mismatch");
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = score_unchecked(rows.subspan(r * n, n));
}

namespace {

void require_rows(const LabeledDataset& train) {
    if (train.empty() || train.feature_count() == 0) {
        throw InvalidInput("training set is empty");
    }
}

} // namespace

ScoringModel train_perceptron(const LabeledDataset& train, const TrainConfig& config,
                              const std::optional<LinearParams>& initial) {
    config.validate();
    require_rows(train);
    const std::size_t n = train.feature_count();

    PerceptronModel m;
    m.params = initial.value_or(LinearParams{std::vector<double>(n, 0.0), 0.0});
    if (m.params.w.size() != n) throw InvalidInput("initial weight vector has wrong length");

    for (std::size_t epoch = 0; epoch < config.perceptron_epochs; ++epoch) {
        std::size_t mistakes = 0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            const auto x = train.row(i);
            const double y = to_int(train.label(i));
            if (y * (dot(m.params.w, x) + m.params.b) <= 0.0) {
                for (std::size_t j = 0; j < n; ++j) m.params.w[j] += y * x[j];
                m.params.b += y;
                ++mistakes;
                ++m.updates;
            }
        }
        if (mistakes == 0) {
            m.converged = true;
            break;
        }
    }
    return ScoringModel(std::move(m), n);
}

ScoringModel build_cosine_template(const LabeledDataset& train, const TrainConfig&) {
    require_rows(train);
    const std::size_t n = train.feature_count();
    std::vector<double> sum(n, 0.0);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.label(i) != Label::Positive) continue;
        const auto x = train.row(i);
        for (std::size_t j = 0; j < n; ++j) sum[j] += x[j];
        ++positives;
    }
    if (positives == 0) throw InvalidInput("cosine template needs at least one positive sample");
    for (double& v : sum) v /= static_cast<double>(positives);
    if (std::all_of(sum.begin(), sum.end(), [](double v) { return v == 0.0; })) {
        throw InvalidInput("cosine template is the zero vector");
    }
    return ScoringModel(CosineModel{std::move(sum)}, n);
}

ScoringModel train_model(const LabeledDataset& train, const TrainConfig& config) {
    switch (config.algorithm) {
    case Algorithm::Perceptron: return train_perceptron(train, config);
    case Algorithm::LinearSvm: return train_linear_svm(train, config);
    case Algorithm::RbfSvm: return train_rbf_svm(train, config);
    case Algorithm::RandomForest: return train_random_forest(train, config);
    case Algorithm::Mlp: return train_mlp(train, config);
    case Algorithm::Cosine: return build_cosine_template(train, config);
    }
    throw InvalidInput("unknown algorithm");
}

} // namespace araudit
