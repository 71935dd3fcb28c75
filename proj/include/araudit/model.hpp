#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "araudit/dataset.hpp"

namespace araudit {

enum class Algorithm { Perceptron, LinearSvm, RbfSvm, RandomForest, Mlp, Cosine };

/// CLI tags: perceptron, linsvm, rbfsvm, rndf, mlp, cosine.
std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view tag);

struct TrainConfig {
    Algorithm algorithm = Algorithm::LinearSvm;

    double svm_c = 1e4;
    std::optional<double> rbf_gamma; // unset: 1 / feature_count
    double svm_tolerance = 1e-3;
    std::size_t svm_max_iterations = 2'000'000;

    std::size_t tree_count = 100;
    std::size_t max_depth = 0; // 0: unlimited

    std::vector<std::size_t> mlp_hidden{64, 32};
    std::size_t mlp_steps = 5000;
    std::size_t mlp_batch = 50;
    double mlp_learning_rate = 0.05;
    double mlp_initial_accumulator = 0.1;

    std::size_t perceptron_epochs = 1000;

    std::uint64_t seed = 0;

    void validate() const;
};

struct LinearParams {
    std::vector<double> w;
    double b = 0.0;
    friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

/// Hard-scored linear threshold unit: 1 when <w,x> + b > 0, else 0.
struct PerceptronModel {
    LinearParams params;
    bool converged = false;
    std::size_t updates = 0;
    friend bool operator==(const PerceptronModel&, const PerceptronModel&) = default;
};

/// score = logistic(<w,x> + b)
struct LinearSvmModel {
    LinearParams params;
    friend bool operator==(const LinearSvmModel&, const LinearSvmModel&) = default;
};

/// score = logistic(sum_k coef_k exp(-gamma |sv_k - x|^2) + bias)
struct RbfSvmModel {
    double gamma = 0.0;
    std::size_t feature_count = 0;
    std::vector<double> support; // row-major support vectors
    std::vector<double> coef;    // alpha_k * y_k
    double bias = 0.0;

    std::size_t support_count() const { return coef.size(); }
    double decision(std::span<const double> x) const;
    friend bool operator==(const RbfSvmModel&, const RbfSvmModel&) = default;
};

struct DecisionTree {
    struct Node {
        std::int32_t feature = -1; // -1 marks a leaf
        double threshold = 0.0;    // x[feature] <= threshold goes left
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        std::int8_t vote = -1;     // leaf class
        friend bool operator==(const Node&, const Node&) = default;
    };
    std::vector<Node> nodes;

    int vote(std::span<const double> x) const;
    std::size_t depth() const;
    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

/// score = fraction of trees voting +1.
struct RandomForestModel {
    std::vector<DecisionTree> trees;
    friend bool operator==(const RandomForestModel&, const RandomForestModel&) = default;
};

struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights; // outputs x inputs, row-major
    std::vector<double> bias;
    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// ReLU hidden layers and a single logistic output unit.
struct MlpModel {
    std::vector<DenseLayer> layers;
    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// score = (cos(x, template) + 1) / 2, zero vectors score 0.
struct CosineModel {
    std::vector<double> templ;
    friend bool operator==(const CosineModel&, const CosineModel&) = default;
};

/// A trained classifier behind one confidence interface: score(x) in [0, 1],
/// accept iff score(x) >= threshold. Immutable once built.
class ScoringModel {
public:
    using Params = std::variant<PerceptronModel, LinearSvmModel, RbfSvmModel, RandomForestModel,
                                MlpModel, CosineModel>;

    ScoringModel(Params params, std::size_t feature_count);

    Algorithm algorithm() const noexcept;
    std::size_t feature_count() const noexcept { return feature_count_; }
    const Params& params() const noexcept { return params_; }

    template <class T>
    const T& as() const {
        return std::get<T>(params_);
    }

    /// Throws InvalidInput on a dimension mismatch.
    double score(std::span<const double> x) const;
    /// Same result as score() without the dimension check.
    double score_unchecked(std::span<const double> x) const;
    /// Scores consecutive rows of a row-major block.
    void score_rows(std::span<const double> rows, std::span<double> out) const;

    Label predict(std::span<const double> x, double threshold) const {
        return score(x) >= threshold ? Label::Positive : Label::Negative;
    }

    friend bool operator==(const ScoringModel&, const ScoringModel&) = default;

private:
    Params params_;
    std::size_t feature_count_ = 0;
};

/// Mistake-driven perceptron updates until an epoch with no mistakes or the
/// epoch limit. `initial` seeds (w, b); otherwise starts from zero.
ScoringModel train_perceptron(const LabeledDataset& train, const TrainConfig& config,
                              const std::optional<LinearParams>& initial = std::nullopt);

/// Soft-margin SVM with a linear kernel (hinge loss, penalty C, unregularised bias).
ScoringModel train_linear_svm(const LabeledDataset& train, const TrainConfig& config);

/// Soft-margin SVM with k(x, z) = exp(-gamma |x - z|^2).
ScoringModel train_rbf_svm(const LabeledDataset& train, const TrainConfig& config);

/// Bagged Gini trees with floor(sqrt(n)) candidate features per split.
ScoringModel train_random_forest(const LabeledDataset& train, const TrainConfig& config);

/// Fully connected network trained with Adagrad on mini-batches.
ScoringModel train_mlp(const LabeledDataset& train, const TrainConfig& config);

/// Mean of the positive training vectors; negatives are ignored.
ScoringModel build_cosine_template(const LabeledDataset& train, const TrainConfig& config = {});

/// Dispatches on config.algorithm.
ScoringModel train_model(const LabeledDataset& train, const TrainConfig& config);

/// Fixed-order dot product shared by every linear scoring path.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

double logistic(double z) noexcept;

} // namespace araudit
