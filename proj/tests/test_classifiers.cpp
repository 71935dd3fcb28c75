#include <doctest.h>

#include <cmath>
#include <numeric>
#include <limits>
#include <sstream>

#include "araudit/error.hpp"
#include "araudit/harness.hpp"
#include "araudit/mlp.hpp"
#include "araudit/model_io.hpp"
#include "araudit/region.hpp"
#include "support.hpp"

using namespace araudit;
using testing::blobs;

namespace {

TrainConfig quick(Algorithm a) {
    TrainConfig c;
    c.algorithm = a;
    c.seed = 17;
    c.tree_count = 25;
    c.mlp_steps = 300;
    return c;
}

double accuracy(const ScoringModel& m, const LabeledDataset& ds, double t = 0.5) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) ok += m.predict(ds.row(i), t) == ds.label(i) ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(ds.size());
}

double hinge_objective(double w0, double w1, double b, const LabeledDataset& ds, double C) {
    double loss = 0.5 * (w0 * w0 + w1 * w1);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double y = to_int(ds.label(i));
        loss += C * std::max(0.0, 1.0 - y * (w0 * ds.row(i)[0] + w1 * ds.row(i)[1] + b));
    }
    return loss;
}

// Coarse-then-fine exhaustive grid over (w0, w1, b).
double grid_oracle(const LabeledDataset& ds, double C) {
    double best = std::numeric_limits<double>::infinity();
    double bw0 = 0, bw1 = 0, bb = 0;
    for (double w0 = -12; w0 <= 12; w0 += 0.25) {
        for (double w1 = -12; w1 <= 12; w1 += 0.25) {
            for (double b = -12; b <= 12; b += 0.25) {
                const double v = hinge_objective(w0, w1, b, ds, C);
                if (v < best) best = v, bw0 = w0, bw1 = w1, bb = b;
            }
        }
    }
    const double c0 = bw0, c1 = bw1, cb = bb;
    for (double w0 = c0 - 0.3; w0 <= c0 + 0.3; w0 += 0.01) {
        for (double w1 = c1 - 0.3; w1 <= c1 + 0.3; w1 += 0.01) {
            for (double b = cb - 0.3; b <= cb + 0.3; b += 0.01) {
                best = std::min(best, hinge_objective(w0, w1, b, ds, C));
            }
        }
    }
    return best;
}

LabeledDataset xor_set(std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> z(0.0, 0.05);
    LabeledDataset ds(2);
    const double centres[4][2] = {{0.25, 0.25}, {0.75, 0.75}, {0.25, 0.75}, {0.75, 0.25}};
    for (int c = 0; c < 4; ++c) {
        for (int k = 0; k < 25; ++k) {
            const std::vector<double> x{centres[c][0] + z(rng), centres[c][1] + z(rng)};
            ds.add(x, c < 2 ? Label::Positive : Label::Negative, "x");
        }
    }
    return ds;
}

} // namespace

TEST_CASE("perceptron: half-space set with the planted initialization needs no updates") {
    const auto ds = make_half_space_dataset(10, 200, 5);
    const auto m = train_perceptron(ds, quick(Algorithm::Perceptron), half_space_initialization(10));
    const auto& p = m.as<PerceptronModel>();
    CHECK(p.converged);
    CHECK(p.updates == 0);
    CHECK(accuracy(m, ds) == 1.0);
    CHECK(m.score(std::vector<double>(10, 0.9)) == 1.0);
    CHECK(m.score(std::vector<double>(10, 0.1)) == 0.0);
}

TEST_CASE("perceptron: two-point set") {
    LabeledDataset ds(4);
    ds.add(std::vector<double>(4, 1.0), Label::Positive, "p");
    ds.add(std::vector<double>(4, 0.0), Label::Negative, "n");
    const auto m = train_perceptron(ds, quick(Algorithm::Perceptron));
    CHECK(m.as<PerceptronModel>().converged);
    CHECK(accuracy(m, ds) == 1.0);
}

TEST_CASE("perceptron: planted separable sets reach zero training error") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(s);
        const std::size_t n = 2 + s % 6;
        std::vector<double> w(n);
        for (double& v : w) v = uniform01(rng) * 2 - 1;
        const double b = -0.5 * std::accumulate(w.begin(), w.end(), 0.0);
        LabeledDataset ds(n);
        std::vector<double> x(n);
        while (ds.size() < 60) {
            for (double& v : x) v = uniform01(rng);
            const double margin = dot(w, x) + b;
            if (std::abs(margin) < 0.05) continue;
            ds.add(x, margin > 0 ? Label::Positive : Label::Negative, "u");
        }
        if (ds.count(Label::Positive) == 0 || ds.count(Label::Negative) == 0) continue;
        const auto m = train_perceptron(ds, quick(Algorithm::Perceptron));
        REQUIRE(m.as<PerceptronModel>().converged);
        REQUIRE(accuracy(m, ds) == 1.0);
    }
}

TEST_CASE("perceptron: epoch limit flags non-convergence") {
    const auto ds = xor_set(1);
    auto cfg = quick(Algorithm::Perceptron);
    cfg.perceptron_epochs = 5;
    const auto m = train_perceptron(ds, cfg);
    CHECK_FALSE(m.as<PerceptronModel>().converged);
}

TEST_CASE("linear SVM separates the half-space set and accepts about half the cube") {
    const auto ds = make_half_space_dataset(10, 200, 8);
    const auto m = train_linear_svm(ds, quick(Algorithm::LinearSvm));
    CHECK(accuracy(m, ds) == 1.0);
    const std::vector<double> grid{0.5};
    const auto ar = estimate_acceptance_region(m, 200'000, 3, grid);
    CHECK(std::abs(ar[0].accept_fraction - 0.5) < 0.05);
}

TEST_CASE("linear SVM hinge objective is within 5% of a brute-force grid optimum") {
    for (std::uint64_t s = 0; s < 6; ++s) {
        LabeledDataset ds = blobs(40 + s, 10, 2, 0.15);
        TrainConfig cfg = quick(Algorithm::LinearSvm);
        cfg.svm_c = s % 2 == 0 ? 1.0 : 10.0;
        const auto m = train_linear_svm(ds, cfg);
        const auto& p = m.as<LinearSvmModel>().params;
        const double ours = hinge_objective(p.w[0], p.w[1], p.b, ds, cfg.svm_c);
        const double oracle = grid_oracle(ds, cfg.svm_c);
        CAPTURE(s);
        CHECK(std::abs(ours - oracle) <= 0.05 * oracle);
    }
}

TEST_CASE("linear SVM predictions survive per-feature affine rescaling after normalization") {
    LabeledDataset raw = blobs(3, 40, 4, 0.12);
    LabeledDataset scaled(4);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::vector<double> x(raw.row(i).begin(), raw.row(i).end());
        for (std::size_t j = 0; j < 4; ++j) x[j] = 3.0 * (j + 1) * x[j] - 2.0 * j;
        scaled.add(x, raw.label(i), raw.user(i));
    }
    const auto a = min_max_normalize(raw).first;
    const auto b = min_max_normalize(scaled).first;
    const auto ma = train_linear_svm(a, quick(Algorithm::LinearSvm));
    const auto mb = train_linear_svm(b, quick(Algorithm::LinearSvm));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (double t : {0.2, 0.5, 0.8}) CHECK(ma.predict(a.row(i), t) == mb.predict(b.row(i), t));
    }
}

TEST_CASE("SVMs reject single-class input") {
    LabeledDataset ds(2);
    ds.add(std::vector{0.1, 0.2}, Label::Positive, "a");
    ds.add(std::vector{0.3, 0.2}, Label::Positive, "a");
    CHECK_THROWS_AS(train_linear_svm(ds, quick(Algorithm::LinearSvm)), InvalidInput);
    CHECK_THROWS_AS(train_rbf_svm(ds, quick(Algorithm::RbfSvm)), InvalidInput);
    CHECK_THROWS_AS(train_random_forest(ds, quick(Algorithm::RandomForest)), InvalidInput);
}

TEST_CASE("RBF SVM fits XOR where the linear SVM cannot") {
    const auto ds = xor_set(4);
    CHECK(accuracy(train_rbf_svm(ds, quick(Algorithm::RbfSvm)), ds) >= 0.95);
    // a line separates at most three of the four clusters
    CHECK(accuracy(train_linear_svm(ds, quick(Algorithm::LinearSvm)), ds) <= 0.8);
}

TEST_CASE("RBF SVM with small gamma agrees with the linear SVM on separable data") {
    const auto train = blobs(11, 60, 5, 0.1);
    const auto test = blobs(12, 100, 5, 0.1);
    auto cfg = quick(Algorithm::RbfSvm);
    cfg.rbf_gamma = 1e-3;
    const auto rbf = train_rbf_svm(train, cfg);
    const auto lin = train_linear_svm(train, quick(Algorithm::LinearSvm));
    std::size_t agree = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        agree += rbf.predict(test.row(i), 0.5) == lin.predict(test.row(i), 0.5) ? 1 : 0;
    }
    CHECK(static_cast<double>(agree) / test.size() >= 0.9);
}

TEST_CASE("RBF SVM scores a support vector above a far point") {
    Rng rng(2);
    std::normal_distribution<double> z(0.0, 0.02);
    LabeledDataset ds(3);
    for (int k = 0; k < 30; ++k) {
        ds.add(std::vector{0.5 + z(rng), 0.5 + z(rng), 0.5 + z(rng)}, Label::Positive, "p");
    }
    for (int k = 0; k < 30; ++k) {
        std::vector<double> x(3);
        do {
            for (double& v : x) v = uniform01(rng);
        } while (std::abs(x[0] - 0.5) < 0.25 && std::abs(x[1] - 0.5) < 0.25);
        ds.add(x, Label::Negative, "n");
    }
    const auto m = train_rbf_svm(ds, quick(Algorithm::RbfSvm));
    const auto& r = m.as<RbfSvmModel>();
    REQUIRE(r.support_count() > 0);
    const std::span<const double> sv(r.support.data(), 3);
    const double far = m.score(std::vector{0.02, 0.98, 0.02});
    for (std::size_t k = 0; k < r.support_count(); ++k) {
        if (r.coef[k] <= 0) continue;
        CHECK(m.score(std::span<const double>(r.support.data() + 3 * k, 3)) >= far);
    }
    CHECK(m.score(sv) >= 0.0);
}

TEST_CASE("random forest scores are vote fractions") {
    const auto ds = blobs(5, 50, 4, 0.2);
    const auto m = train_random_forest(ds, quick(Algorithm::RandomForest));
    Rng rng(9);
    std::vector<double> x(4);
    for (int k = 0; k < 2000; ++k) {
        for (double& v : x) v = uniform01(rng);
        const double s = m.score(x) * 25.0;
        REQUIRE(std::abs(s - std::round(s)) < 1e-9);
    }
    CHECK(m.as<RandomForestModel>().trees.size() == 25);
}

TEST_CASE("deep forest fits separable training data") {
    const auto ds = blobs(6, 80, 6, 0.08);
    TrainConfig cfg = quick(Algorithm::RandomForest);
    cfg.tree_count = 100;
    CHECK(accuracy(train_random_forest(ds, cfg), ds) >= 0.99);
}

TEST_CASE("forest AR on the half-space set stays near one half") {
    const auto ds = make_half_space_dataset(10, 200, 13);
    TrainConfig cfg = quick(Algorithm::RandomForest);
    cfg.tree_count = 100;
    const auto m = train_random_forest(ds, cfg);
    const auto grid = make_threshold_grid(100);
    const auto ar = estimate_acceptance_region(m, 20'000, 4, grid);
    CHECK(std::abs(ar[50].accept_fraction - 0.5) < 0.1);
    for (std::size_t k = 1; k < ar.size(); ++k) {
        CHECK(ar[k].accept_fraction <= ar[k - 1].accept_fraction);
    }
}

TEST_CASE("forest depth limit is honoured") {
    const auto ds = blobs(7, 60, 3, 0.25);
    TrainConfig cfg = quick(Algorithm::RandomForest);
    cfg.max_depth = 2;
    const auto m = train_random_forest(ds, cfg);
    for (const auto& t : m.as<RandomForestModel>().trees) {
        CHECK(t.depth() <= 2);
    }
}

TEST_CASE("MLP gradient matches central finite differences") {
    for (const auto& hidden : {std::vector<std::size_t>{4, 3}, std::vector<std::size_t>{64, 32}}) {
        const std::size_t n = 5;
        MlpModel model = init_mlp(n, hidden, 23);
        Rng rng(4);
        std::vector<double> rows(5 * n), targets{1, 0, 1, 1, 0};
        for (double& v : rows) v = uniform01(rng);
        // shift biases so no ReLU sits at its kink
        for (auto& l : model.layers) {
            for (double& b : l.bias) b = 0.05 + 0.1 * uniform01(rng);
        }
        const MlpGradient g = mlp_gradient(model, rows, targets);
        CHECK(g.loss == doctest::Approx(mlp_loss(model, rows, targets)).epsilon(1e-12));
        const double h = 1e-6;
        double worst = 0.0;
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            for (auto member : {&DenseLayer::weights, &DenseLayer::bias}) {
                auto& params = model.layers[l].*member;
                const auto& grads = g.layers[l].*member;
                for (std::size_t k = 0; k < params.size(); ++k) {
                    const double keep = params[k];
                    params[k] = keep + h;
                    const double up = mlp_loss(model, rows, targets);
                    params[k] = keep - h;
                    const double down = mlp_loss(model, rows, targets);
                    params[k] = keep;
                    const double fd = (up - down) / (2 * h);
                    const double scale = std::max({std::abs(fd), std::abs(grads[k]), 1e-6});
                    worst = std::max(worst, std::abs(fd - grads[k]) / scale);
                }
            }
        }
        CAPTURE(hidden.size());
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("MLP trained on positives only scores them high") {
    LabeledDataset ds(3);
    Rng rng(1);
    for (int k = 0; k < 40; ++k) {
        ds.add(std::vector{uniform01(rng), uniform01(rng), uniform01(rng)}, Label::Positive, "p");
    }
    const auto m = train_mlp(ds, quick(Algorithm::Mlp));
    double mean = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) mean += m.score(ds.row(i));
    CHECK(mean / ds.size() >= 0.95);
}

TEST_CASE("MLP training is deterministic and learns blobs") {
    const auto ds = blobs(8, 60, 5, 0.1);
    const auto a = train_mlp(ds, quick(Algorithm::Mlp));
    const auto b = train_mlp(ds, quick(Algorithm::Mlp));
    CHECK(a == b);
    CHECK(accuracy(a, ds) >= 0.95);
    auto other = quick(Algorithm::Mlp);
    other.seed = 18;
    CHECK_FALSE(train_mlp(ds, other) == a);
}

TEST_CASE("MLP batch and single scoring agree exactly") {
    const auto ds = blobs(9, 20, 4, 0.1);
    const auto m = train_mlp(ds, quick(Algorithm::Mlp));
    std::vector<double> out(ds.size());
    m.score_rows(ds.values(), out);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(out[i] == m.score(ds.row(i)));
}

TEST_CASE("MLP reports divergence") {
    LabeledDataset ds(2);
    ds.add(std::vector{1e150, 1e150}, Label::Positive, "p");
    ds.add(std::vector{-1e150, 1e150}, Label::Negative, "n");
    auto cfg = quick(Algorithm::Mlp);
    cfg.mlp_learning_rate = 1e150;
    cfg.mlp_batch = 2;
    CHECK_THROWS_AS(train_mlp(ds, cfg), TrainingDiverged);
}

TEST_CASE("cosine template") {
    LabeledDataset ds(2);
    ds.add(std::vector{1.0, 0.0}, Label::Positive, "p");
    ds.add(std::vector{0.5, 0.0}, Label::Positive, "p");
    const auto m = build_cosine_template(ds);
    CHECK(m.as<CosineModel>().templ == std::vector{0.75, 0.0});
    CHECK(m.score(std::vector{0.75, 0.0}) == doctest::Approx(1.0));
    CHECK(m.score(std::vector{0.0, 0.3}) == doctest::Approx(0.5));
    CHECK(m.score(std::vector{0.0, 0.0}) == 0.0);

    LabeledDataset with_neg = ds;
    with_neg.add(std::vector{0.2, 0.9}, Label::Negative, "n");
    CHECK(build_cosine_template(with_neg) == m);

    LabeledDataset zero(2);
    zero.add(std::vector{0.0, 0.0}, Label::Positive, "p");
    CHECK_THROWS_AS(build_cosine_template(zero), InvalidInput);
    LabeledDataset none(2);
    none.add(std::vector{0.1, 0.0}, Label::Negative, "n");
    CHECK_THROWS_AS(build_cosine_template(none), InvalidInput);
}

TEST_CASE("score checks the dimension") {
    const auto m = build_cosine_template(blobs(1, 5, 3));
    CHECK_THROWS_AS(m.score(std::vector{0.1, 0.2}), InvalidInput);
}

TEST_CASE("every classifier: scores in range, threshold semantics, bit-exact reload") {
    const auto ds = blobs(10, 40, 6, 0.15);
    Rng rng(77);
    std::vector<double> x(6);
    for (Algorithm a : {Algorithm::Perceptron, Algorithm::LinearSvm, Algorithm::RbfSvm,
                        Algorithm::RandomForest, Algorithm::Mlp, Algorithm::Cosine}) {
        CAPTURE(to_string(a));
        const auto m = train_model(ds, quick(a));
        CHECK(m.algorithm() == a);
        std::stringstream file;
        save_model(file, m);
        const auto back = load_model(file);
        CHECK(back == m);
        for (int k = 0; k < 10'000; ++k) {
            for (double& v : x) v = uniform01(rng);
            const double s = m.score(x);
            REQUIRE(std::isfinite(s));
            REQUIRE(s >= 0.0);
            REQUIRE(s <= 1.0);
            REQUIRE(back.score(x) == s);
            REQUIRE((m.predict(x, s) == Label::Positive));
            if (s > 0.0) REQUIRE((m.predict(x, std::nextafter(s, 2.0)) == Label::Negative));
        }
    }
}

TEST_CASE("model files reject bad input") {
    std::stringstream junk("not a model\n");
    CHECK_THROWS_AS(load_model(junk), IoError);
    std::stringstream wrong_version("araudit-model 9\nalgorithm linsvm\n");
    CHECK_THROWS_AS(load_model(wrong_version), IoError);
}

TEST_CASE("algorithm tags") {
    for (Algorithm a : {Algorithm::Perceptron, Algorithm::LinearSvm, Algorithm::RbfSvm,
                        Algorithm::RandomForest, Algorithm::Mlp, Algorithm::Cosine}) {
        CHECK(parse_algorithm(to_string(a)) == a);
    }
    CHECK_THROWS_AS(parse_algorithm("knn"), InvalidInput);
    TrainConfig bad;
    bad.svm_c = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}
