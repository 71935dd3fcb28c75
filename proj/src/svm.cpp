#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "araudit/error.hpp"
#include "araudit/model.hpp"

namespace araudit {

namespace {

constexpr double kTau = 1e-12;

/// Lazily computed kernel rows, bounded by a memory budget.
class KernelRows {
public:
    using RowFn = std::function<void(std::size_t, std::span<double>)>;

    KernelRows(std::size_t m, RowFn fn) : m_(m), fn_(std::move(fn)), rows_(m) {
        constexpr std::size_t budget = std::size_t{256} << 20;
        capacity_ = std::clamp<std::size_t>(budget / (sizeof(double) * std::max<std::size_t>(m, 1)),
                                            2, m);
    }

    std::span<const double> row(std::size_t i) {
        if (rows_[i].empty()) {
            if (cached_.size() == capacity_) {
                rows_[cached_.front()].clear();
                rows_[cached_.front()].shrink_to_fit();
                cached_.pop_front();
            }
            rows_[i].resize(m_);
            fn_(i, rows_[i]);
            cached_.push_back(i);
        }
        return rows_[i];
    }

private:
    std::size_t m_;
    RowFn fn_;
    std::vector<std::vector<double>> rows_;
    std::deque<std::size_t> cached_;
    std::size_t capacity_;
};

struct SmoResult {
    std::vector<double> alpha;
    double rho = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Dual soft-margin SVM:
//   min 0.5 a'Qa - e'a  s.t. y'a = 0, 0 <= a <= C,  Q_ij = y_i y_j K_ij
// Pairwise updates with second-order working-set selection.
SmoResult solve_smo(std::span<const double> y, double C, double eps, std::size_t max_iter,
                    KernelRows& kernel, std::span<const double> diag) {
    const std::size_t m = y.size();
    SmoResult r;
    r.alpha.assign(m, 0.0);
    std::vector<double> G(m, -1.0);
    auto& a = r.alpha;

    auto is_upper = [&](std::size_t t) { return a[t] >= C; };
    auto is_lower = [&](std::size_t t) { return a[t] <= 0.0; };
    auto in_up = [&](std::size_t t) { return y[t] > 0 ? !is_upper(t) : !is_lower(t); };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? !is_lower(t) : !is_upper(t); };

    for (; r.iterations < max_iter; ++r.iterations) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = m;
        for (std::size_t t = 0; t < m; ++t) {
            if (in_up(t) && -y[t] * G[t] >= gmax) {
                if (-y[t] * G[t] > gmax || i == m) {
                    gmax = -y[t] * G[t];
                    i = t;
                }
            }
        }
        if (i == m) {
            r.converged = true;
            break;
        }
        const auto Ki = kernel.row(i);

        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = m;
        for (std::size_t t = 0; t < m; ++t) {
            if (!in_low(t)) continue;
            const double yg = y[t] * G[t];
            gmax2 = std::max(gmax2, yg);
            const double grad_diff = gmax + yg;
            if (grad_diff > 0.0) {
                double quad = diag[i] + diag[t] - 2.0 * Ki[t];
                if (quad <= 0.0) quad = kTau;
                const double obj = -(grad_diff * grad_diff) / quad;
                if (obj < best) {
                    best = obj;
                    j = t;
                }
            }
        }
        if (gmax + gmax2 < eps || j == m) {
            r.converged = true;
            break;
        }
        const auto Kj = kernel.row(j);

        const double old_ai = a[i];
        const double old_aj = a[j];
        const double Qij = y[i] * y[j] * Ki[j];
        if (y[i] != y[j]) {
            double quad = diag[i] + diag[j] + 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) { a[j] = 0.0; a[i] = diff; }
            } else {
                if (a[i] < 0.0) { a[i] = 0.0; a[j] = -diff; }
            }
            if (diff > 0.0) {
                if (a[i] > C) { a[i] = C; a[j] = C - diff; }
            } else {
                if (a[j] > C) { a[j] = C; a[i] = C + diff; }
            }
        } else {
            double quad = diag[i] + diag[j] - 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > C) {
                if (a[i] > C) { a[i] = C; a[j] = sum - C; }
            } else {
                if (a[j] < 0.0) { a[j] = 0.0; a[i] = sum; }
            }
            if (sum > C) {
                if (a[j] > C) { a[j] = C; a[i] = sum - C; }
            } else {
                if (a[i] < 0.0) { a[i] = 0.0; a[j] = sum; }
            }
        }

        const double di = a[i] - old_ai;
        const double dj = a[j] - old_aj;
        for (std::size_t t = 0; t < m; ++t) {
            G[t] += y[t] * (y[i] * Ki[t] * di + y[j] * Kj[t] * dj);
        }
    }

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < m; ++t) {
        const double yg = y[t] * G[t];
        if (is_upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (is_lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free_count;
            sum_free += yg;
        }
    }
    r.rho = free_count > 0 ? sum_free / static_cast<double>(free_count) : (ub + lb) / 2.0;
    return r;
}

std::vector<double> signed_labels(const LabeledDataset& train) {
    if (train.empty()) throw InvalidInput("training set is empty");
    std::vector<double> y(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) y[i] = to_int(train.label(i));
    const bool has_pos = std::find(y.begin(), y.end(), 1.0) != y.end();
    const bool has_neg = std::find(y.begin(), y.end(), -1.0) != y.end();
    if (!has_pos || !has_neg) throw InvalidInput("SVM training needs both classes present");
    return y;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

} // namespace

ScoringModel train_linear_svm(const LabeledDataset& train, const TrainConfig& config) {
    config.validate();
    const auto y = signed_labels(train);
    const std::size_t m = train.size();
    const std::size_t n = train.feature_count();

    std::vector<double> diag(m);
    for (std::size_t i = 0; i < m; ++i) diag[i] = dot(train.row(i), train.row(i));
    KernelRows kernel(m, [&](std::size_t i, std::span<double> out) {
        for (std::size_t t = 0; t < m; ++t) out[t] = dot(train.row(i), train.row(t));
    });
    const auto sol = solve_smo(y, config.svm_c, config.svm_tolerance, config.svm_max_iterations,
                               kernel, diag);

    LinearParams p{std::vector<double>(n, 0.0), -sol.rho};
    for (std::size_t i = 0; i < m; ++i) {
        if (sol.alpha[i] == 0.0) continue;
        const auto x = train.row(i);
        const double c = sol.alpha[i] * y[i];
        for (std::size_t j = 0; j < n; ++j) p.w[j] += c * x[j];
    }
    return ScoringModel(LinearSvmModel{std::move(p)}, n);
}

ScoringModel train_rbf_svm(const LabeledDataset& train, const TrainConfig& config) {
    config.validate();
    const auto y = signed_labels(train);
    const std::size_t m = train.size();
    const std::size_t n = train.feature_count();
    const double gamma = config.rbf_gamma.value_or(1.0 / static_cast<double>(n));

    const std::vector<double> diag(m, 1.0);
    KernelRows kernel(m, [&](std::size_t i, std::span<double> out) {
        for (std::size_t t = 0; t < m; ++t) {
            out[t] = std::exp(-gamma * squared_distance(train.row(i), train.row(t)));
        }
    });
    const auto sol = solve_smo(y, config.svm_c, config.svm_tolerance, config.svm_max_iterations,
                               kernel, diag);

    RbfSvmModel model;
    model.gamma = gamma;
    model.feature_count = n;
    model.bias = -sol.rho;
    for (std::size_t i = 0; i < m; ++i) {
        if (sol.alpha[i] <= 0.0) continue;
        const auto x = train.row(i);
        model.support.insert(model.support.end(), x.begin(), x.end());
        model.coef.push_back(sol.alpha[i] * y[i]);
    }
    return ScoringModel(std::move(model), n);
}

} // namespace araudit
