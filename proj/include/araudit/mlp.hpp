#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "araudit/model.hpp"

namespace araudit {

/// Glorot-uniform weights, zero biases; hidden widths then one output unit.
MlpModel init_mlp(std::size_t inputs, std::span<const std::size_t> hidden, std::uint64_t seed);

/// Output-unit pre-activation for one vector (fixed-order scalar path).
double mlp_logit(const MlpModel& model, std::span<const double> x);

struct MlpGradient {
    double loss = 0.0;
    std::vector<DenseLayer> layers; // same shapes as the model, holding dLoss/dparam
};

/// Mean binary cross-entropy of logistic outputs over a batch of row-major
/// inputs with targets in {0, 1}.
double mlp_loss(const MlpModel& model, std::span<const double> rows,
                std::span<const double> targets);

/// Loss and its exact gradient by backpropagation.
MlpGradient mlp_gradient(const MlpModel& model, std::span<const double> rows,
                         std::span<const double> targets);

} // namespace araudit
