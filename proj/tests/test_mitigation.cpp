#include <doctest.h>

#include <cmath>
#include <cstring>
#include <map>

#include "araudit/error.hpp"
#include "araudit/mitigation.hpp"
#include "araudit/rng.hpp"
#include "support.hpp"

using namespace araudit;

namespace {

std::pair<double, double> moments(const std::vector<double>& v, std::size_t n, std::size_t feature) {
    const std::size_t m = v.size() / n;
    double mean = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < m; ++k) mean += v[k * n + feature];
    mean /= m;
    for (std::size_t k = 0; k < m; ++k) sq += (v[k * n + feature] - mean) * (v[k * n + feature] - mean);
    return {mean, sq / (m - 1)};
}

LabeledDataset balanced(std::size_t per_class, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset ds(n);
    std::vector<double> x(n);
    for (std::size_t k = 0; k < per_class; ++k) {
        for (double& v : x) v = 0.2 + 0.3 * uniform01(rng);
        ds.add(x, Label::Positive, "target");
    }
    for (std::size_t k = 0; k < per_class; ++k) {
        for (double& v : x) v = uniform01(rng);
        ds.add(x, Label::Negative, "other" + std::to_string(k % 9));
    }
    return ds;
}

std::map<std::string, std::size_t> composition(const LabeledDataset& ds) {
    std::map<std::string, std::size_t> m;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::string& u = ds.user(i);
        const std::string key = ds.label(i) == Label::Positive ? "pos"
                                : u == kBetaNoiseUser           ? "beta"
                                : u == kAuxUser                 ? "aux"
                                                                : "other";
        ++m[key];
    }
    return m;
}

} // namespace

TEST_CASE("shape parameters") {
    const std::vector<double> mu{0.1, 0.5, 0.8, 0.0, 1.0};
    const auto s = BetaNoiseSpec::from_means(mu);
    CHECK(s.alpha[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(s.alpha[1] == 0.5);
    CHECK(s.alpha[2] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(s.alpha[3] == 1.0);
    CHECK(s.alpha[4] == 1.0);
    CHECK(s.mirrored == std::vector<bool>{false, false, true, false, true});
    CHECK(BetaNoiseSpec::beta == 0.5);
    for (double a : s.alpha) CHECK((a >= 0.5 && a <= 1.0));
    CHECK_THROWS_AS(BetaNoiseSpec::from_means(std::vector{0.2, 1.2}), InvalidInput);
    CHECK_THROWS_AS(BetaNoiseSpec::from_means(std::vector{-0.01}), InvalidInput);
    CHECK_THROWS_AS(beta_noise(std::vector{0.2}, 0, 1), InvalidInput);
}

TEST_CASE("mean 0.5 gives the arcsine law") {
    const auto v = beta_noise(std::vector{0.5}, 100'000, 3);
    const auto [mean, var] = moments(v, 1, 0);
    CHECK(std::abs(mean - 0.5) < 0.01);
    CHECK(std::abs(var - 0.125) < 0.005); // 1/8 for Beta(1/2, 1/2)
}

TEST_CASE("mean 0.1 draws Beta(0.9, 0.5) directly") {
    const auto v = beta_noise(std::vector{0.1, 0.9}, 100'000, 4);
    const double a = 0.9, b = 0.5;
    const double m = a / (a + b), var = a * b / ((a + b) * (a + b) * (a + b + 1));
    const auto [m0, v0] = moments(v, 2, 0);
    CHECK(std::abs(m0 - m) < 0.01);
    CHECK(std::abs(v0 - var) < 0.005);
    const auto [m1, v1] = moments(v, 2, 1);
    CHECK(std::abs(m1 - (1 - m)) < 0.01);
    CHECK(std::abs(v1 - var) < 0.005);
}

TEST_CASE("noise stays in the unit interval") {
    Rng rng(5);
    std::vector<double> mu(30);
    for (double& m : mu) m = uniform01(rng);
    mu[0] = 0.0;
    mu[1] = 1.0;
    for (double v : beta_noise(mu, 5000, 8)) REQUIRE((v >= 0.0 && v <= 1.0));
}

TEST_CASE("mirror identity is bit-exact") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(s);
        std::vector<double> mu(25), mirror(25);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            do {
                mu[i] = uniform01(rng);
            } while (mu[i] == 0.5);
            mirror[i] = 1.0 - mu[i];
        }
        const auto a = beta_noise(mu, 200, s);
        const auto b = beta_noise(mirror, 200, s);
        // the side with mean below 1/2 holds the raw Beta draw
        for (std::size_t k = 0; k < a.size(); ++k) {
            const bool low = mu[k % mu.size()] < 0.5;
            const double raw = low ? a[k] : b[k];
            const double flipped = 1.0 - raw;
            REQUIRE(std::memcmp(&flipped, low ? &b[k] : &a[k], sizeof(double)) == 0);
        }
    }
}

TEST_CASE("thirds composition") {
    const auto base = balanced(90, 6, 1);
    const auto out = augment_training_set(base, std::nullopt, std::nullopt, 12);
    CHECK(out.size() == 270);
    const auto c = composition(out);
    CHECK(c.at("pos") == 90);
    CHECK(c.at("other") == 90);
    CHECK(c.at("beta") == 90);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(std::equal(base.row(i).begin(), base.row(i).end(), out.row(i).begin()));
    }
}

TEST_CASE("quarters composition with auxiliary negatives") {
    const auto base = balanced(90, 6, 2);
    const auto aux = balanced(60, 6, 3); // 120 rows, subsampled to 90
    const auto out = augment_training_set(base, std::nullopt, aux, 13);
    CHECK(out.size() == 360);
    const auto c = composition(out);
    CHECK(c.at("pos") == 90);
    CHECK(c.at("other") == 90);
    CHECK(c.at("beta") == 90);
    CHECK(c.at("aux") == 90);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.user(i) == kAuxUser) CHECK(out.label(i) == Label::Negative);
    }
    CHECK_THROWS_AS(augment_training_set(base, std::nullopt, balanced(40, 6, 4), 1), InvalidInput);
    CHECK_THROWS_AS(augment_training_set(base, std::nullopt, balanced(90, 5, 4), 1), InvalidInput);
}

TEST_CASE("zero beta count without aux is a no-op") {
    const auto base = balanced(30, 4, 5);
    CHECK(augment_training_set(base, 0, std::nullopt, 9) == base);
}

TEST_CASE("beta means come from the training positives") {
    const auto base = balanced(50, 5, 6);
    const auto out = augment_training_set(base, std::nullopt, std::nullopt, 77);
    const auto means = positive_means(base);
    const auto expected = beta_noise(means, 50, derive_seed(77, {hash_tag("beta-noise")}));
    std::vector<double> got;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.user(i) == kBetaNoiseUser) got.insert(got.end(), out.row(i).begin(), out.row(i).end());
    }
    CHECK(got == expected);

    // the positive means are the plain averages
    double m0 = 0.0;
    for (std::size_t i = 0; i < 50; ++i) m0 += base.row(i)[0];
    CHECK(means[0] == doctest::Approx(m0 / 50).epsilon(1e-14));
}
