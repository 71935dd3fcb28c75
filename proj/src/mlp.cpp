#include "araudit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "araudit/error.hpp"
#include "araudit/rng.hpp"

namespace araudit {

namespace {

using Mat = Eigen::MatrixXd;
using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const MatR>;
using ConstBias = Eigen::Map<const Eigen::VectorXd>;

struct Forward {
    std::vector<Mat> activations; // [0] is the input (features x batch)
    std::vector<Mat> pre;         // pre-activations per layer
};

Forward forward(const MlpModel& model, std::span<const double> rows, std::size_t batch) {
    const std::size_t n = model.layers.front().inputs;
    if (rows.size() != batch * n) throw InvalidInput("MLP batch has the wrong size");
    Forward f;
    f.activations.push_back(Eigen::Map<const MatR>(rows.data(), static_cast<Eigen::Index>(batch),
                                                   static_cast<Eigen::Index>(n))
                                .transpose());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        ConstWeights W(layer.weights.data(), static_cast<Eigen::Index>(layer.outputs),
                       static_cast<Eigen::Index>(layer.inputs));
        ConstBias b(layer.bias.data(), static_cast<Eigen::Index>(layer.outputs));
        Mat z = W * f.activations.back();
        z.colwise() += b;
        f.pre.push_back(z);
        if (l + 1 < model.layers.size()) {
            f.activations.push_back(z.cwiseMax(0.0));
        }
    }
    return f;
}

double bce_with_logit(double z, double t) {
    return std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
}

} // namespace

MlpModel init_mlp(std::size_t inputs, std::span<const std::size_t> hidden, std::uint64_t seed) {
    Rng rng = make_rng(seed, {hash_tag("mlp-init")});
    MlpModel model;
    std::size_t in = inputs;
    std::vector<std::size_t> widths(hidden.begin(), hidden.end());
    widths.push_back(1);
    for (std::size_t out : widths) {
        DenseLayer layer{in, out, std::vector<double>(in * out), std::vector<double>(out, 0.0)};
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& w : layer.weights) w = (2.0 * uniform01(rng) - 1.0) * limit;
        model.layers.push_back(std::move(layer));
        in = out;
    }
    return model;
}

double mlp_logit(const MlpModel& model, std::span<const double> x) {
    std::vector<double> current(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        next.resize(layer.outputs);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            const std::span<const double> w(layer.weights.data() + o * layer.inputs, layer.inputs);
            double z = dot(w, current) + layer.bias[o];
            if (l + 1 < model.layers.size()) z = std::max(z, 0.0);
            next[o] = z;
        }
        current.swap(next);
    }
    return current.front();
}

double mlp_loss(const MlpModel& model, std::span<const double> rows,
                std::span<const double> targets) {
    const Forward f = forward(model, rows, targets.size());
    const Mat& z = f.pre.back();
    double loss = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        loss += bce_with_logit(z(0, static_cast<Eigen::Index>(k)), targets[k]);
    }
    return loss / static_cast<double>(targets.size());
}

MlpGradient mlp_gradient(const MlpModel& model, std::span<const double> rows,
                         std::span<const double> targets) {
    const std::size_t batch = targets.size();
    const Forward f = forward(model, rows, batch);
    const auto B = static_cast<double>(batch);

    MlpGradient g;
    const Mat& z = f.pre.back();
    Mat delta(1, static_cast<Eigen::Index>(batch));
    for (std::size_t k = 0; k < batch; ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        g.loss += bce_with_logit(z(0, c), targets[k]);
        delta(0, c) = (logistic(z(0, c)) - targets[k]) / B;
    }
    g.loss /= B;

    g.layers.resize(model.layers.size());
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const auto& layer = model.layers[l];
        auto& out = g.layers[l];
        out.inputs = layer.inputs;
        out.outputs = layer.outputs;
        out.weights.resize(layer.weights.size());
        out.bias.resize(layer.bias.size());

        Eigen::Map<MatR> gW(out.weights.data(), static_cast<Eigen::Index>(layer.outputs),
                            static_cast<Eigen::Index>(layer.inputs));
        Eigen::Map<Eigen::VectorXd> gb(out.bias.data(), static_cast<Eigen::Index>(layer.outputs));
        gW.noalias() = delta * f.activations[l].transpose();
        gb = delta.rowwise().sum();

        if (l > 0) {
            ConstWeights W(layer.weights.data(), static_cast<Eigen::Index>(layer.outputs),
                           static_cast<Eigen::Index>(layer.inputs));
            Mat back = W.transpose() * delta;
            delta = back.cwiseProduct(
                (f.pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

ScoringModel train_mlp(const LabeledDataset& train, const TrainConfig& config) {
    config.validate();
    if (train.empty()) throw InvalidInput("training set is empty");
    const std::size_t n = train.feature_count();
    const std::size_t m = train.size();
    const std::size_t batch = config.mlp_batch;

    MlpModel model = init_mlp(n, config.mlp_hidden, config.seed);
    std::vector<DenseLayer> accum = model.layers;
    for (auto& a : accum) {
        std::fill(a.weights.begin(), a.weights.end(), config.mlp_initial_accumulator);
        std::fill(a.bias.begin(), a.bias.end(), config.mlp_initial_accumulator);
    }

    Rng rng = make_rng(config.seed, {hash_tag("mlp-batches")});
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;

    std::vector<double> rows(batch * n);
    std::vector<double> targets(batch);
    const double lr = config.mlp_learning_rate;
    auto adagrad = [lr](std::vector<double>& param, std::vector<double>& acc,
                        const std::vector<double>& grad) {
        for (std::size_t k = 0; k < param.size(); ++k) {
            acc[k] += grad[k] * grad[k];
            param[k] -= lr * grad[k] / std::sqrt(acc[k]);
        }
    };

    for (std::size_t step = 0; step < config.mlp_steps; ++step) {
        for (std::size_t k = 0; k < batch; ++k) {
            if (cursor == m) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const std::size_t r = order[cursor++];
            const auto x = train.row(r);
            std::copy(x.begin(), x.end(), rows.begin() + static_cast<std::ptrdiff_t>(k * n));
            targets[k] = train.label(r) == Label::Positive ? 1.0 : 0.0;
        }
        const MlpGradient g = mlp_gradient(model, rows, targets);
        if (!std::isfinite(g.loss)) {
            throw TrainingDiverged(fmt::format("MLP loss became non-finite at step {}", step));
        }
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            adagrad(model.layers[l].weights, accum[l].weights, g.layers[l].weights);
            adagrad(model.layers[l].bias, accum[l].bias, g.layers[l].bias);
        }
    }
    return ScoringModel(std::move(model), n);
}

} // namespace araudit
