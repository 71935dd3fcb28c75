#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "araudit/error.hpp"
#include "araudit/harness.hpp"
#include "araudit/region.hpp"
#include "support.hpp"

using namespace araudit;

namespace {

ScoreFn box(std::vector<double> upper) {
    return [upper](std::span<const double> x) {
        for (std::size_t i = 0; i < upper.size(); ++i) {
            if (x[i] > upper[i]) return 0.0;
        }
        return 1.0;
    };
}

bool within_4se(double p, double v, std::size_t N) {
    return std::abs(p - v) <= 4.0 * std::sqrt(v * (1 - v) / static_cast<double>(N));
}

ScoringModel random_linear(Rng& rng, std::size_t n) {
    LinearSvmModel m;
    for (std::size_t i = 0; i < n; ++i) m.params.w.push_back(uniform01(rng) * 8 - 4);
    m.params.b = uniform01(rng) * 2 - 1;
    return ScoringModel(m, n);
}

} // namespace

TEST_CASE("threshold grid") {
    const auto g = make_threshold_grid();
    REQUIRE(g.size() == 100);
    CHECK(g[0] == 0.0);
    CHECK(g[37] == 0.37);
    CHECK(g[99] == 0.99);
    CHECK(make_threshold_grid(1000)[999] == 0.999);
    CHECK_THROWS_AS(make_threshold_grid(0), InvalidInput);
}

TEST_CASE("always-accept predicate fills the cube") {
    const auto grid = make_threshold_grid();
    const auto est = estimate_acceptance_region([](std::span<const double>) { return 1.0; }, 4,
                                                1000, 1, grid);
    for (const auto& e : est) {
        CHECK(e.accept_fraction == 1.0);
        CHECK(e.standard_error == 0.0);
        CHECK(e.reject_fraction() == 0.0);
        CHECK(e.samples == 1000);
    }
}

TEST_CASE("box predicates recover their exact volume") {
    const std::vector<double> grid{0.5};
    const std::size_t N = 200'000;
    std::vector<double> half(10, 1.0);
    half[0] = 0.5;
    const auto a = estimate_acceptance_region(box(half), 10, N, 3, grid);
    CHECK(within_4se(a[0].accept_fraction, 0.5, N));
    const auto b = estimate_acceptance_region(box(std::vector<double>(10, 0.5)), 10, N, 4, grid);
    CHECK(within_4se(b[0].accept_fraction, std::ldexp(1.0, -10), N));
    CHECK(a[0].standard_error ==
          doctest::Approx(std::sqrt(a[0].accept_fraction * (1 - a[0].accept_fraction) / N)));
}

TEST_CASE("estimate is independent of the worker count") {
    const auto grid = make_threshold_grid(50);
    Rng rng(5);
    const auto m = random_linear(rng, 7);
    const auto one = estimate_acceptance_region(m, 100'000, 9, grid, 1);
    const auto four = estimate_acceptance_region(m, 100'000, 9, grid, 4);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(one[k].accept_fraction == four[k].accept_fraction);
}

TEST_CASE("one-pass histogram equals per-threshold recomputation") {
    const auto grid = make_threshold_grid(100);
    Rng rng(6);
    const auto m = random_linear(rng, 5);
    std::vector<double> seen;
    const ScoreFn record = [&](std::span<const double> x) {
        const double s = m.score(x);
        seen.push_back(s);
        return s;
    };
    const std::size_t N = 40'000;
    const auto est = estimate_acceptance_region(record, 5, N, 2, grid, 1);
    REQUIRE(seen.size() == N);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::size_t c = 0;
        for (double s : seen) c += s >= grid[k] ? 1 : 0;
        REQUIRE(est[k].accept_fraction == static_cast<double>(c) / N);
    }
    // a score equal to a threshold is accepted there
    const std::vector<double> g2{0.25, 0.5};
    const auto at = estimate_acceptance_region([](std::span<const double>) { return 0.5; }, 1, 10,
                                               1, g2);
    CHECK(at[1].accept_fraction == 1.0);
}

TEST_CASE("estimator rejects bad arguments") {
    const std::vector<double> grid{0.5};
    const std::vector<double> unsorted{0.5, 0.2};
    const auto f = [](std::span<const double>) { return 0.3; };
    CHECK_THROWS_AS(estimate_acceptance_region(f, 3, 0, 1, grid), InvalidInput);
    CHECK_THROWS_AS(estimate_acceptance_region(f, 3, 10, 1, unsorted), InvalidInput);
    CHECK_THROWS_AS(estimate_acceptance_region(f, 3, 10, 1, std::vector<double>{}), InvalidInput);
}

TEST_CASE("curves at the boundary threshold and for a perfect separator") {
    const auto grid = make_threshold_grid();
    const std::vector<double> pos{1.0, 1.0, 1.0};
    const std::vector<double> neg{0.0, 0.0};
    const std::vector<double> ar(grid.size(), 0.5);
    const auto c = curves_from_scores(pos, neg, ar, grid);
    CHECK(c.frr[0] == 0.0);
    CHECK(c.fpr[0] == 1.0);
    bool clean = false;
    for (std::size_t k = 0; k < grid.size(); ++k) clean = clean || (c.frr[k] == 0 && c.fpr[k] == 0);
    CHECK(clean);
    CHECK(c.eer.discrepancy == 0.0);
    CHECK(c.eer.index == 1);
    CHECK_THROWS_AS(curves_from_scores(pos, std::vector<double>{}, ar, grid), InvalidInput);
}

TEST_CASE("curves match a brute-force recount and are monotone") {
    const auto grid = make_threshold_grid();
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(100 + s);
        const std::size_t n = 3;
        const auto m = random_linear(rng, n);
        LabeledDataset test(n);
        std::vector<double> x(n);
        for (int k = 0; k < 60; ++k) {
            for (double& v : x) v = uniform01(rng);
            test.add(x, k % 3 == 0 ? Label::Positive : Label::Negative, "u");
        }
        const auto est = estimate_acceptance_region(m, 5000, s, grid);
        const auto c = evaluate_curves(m, test, est, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            std::size_t rejected_pos = 0, accepted_neg = 0, pos = 0, neg = 0;
            for (std::size_t i = 0; i < test.size(); ++i) {
                const double score = m.score(test.row(i));
                if (test.label(i) == Label::Positive) {
                    ++pos;
                    rejected_pos += score < grid[k] ? 1 : 0;
                } else {
                    ++neg;
                    accepted_neg += score >= grid[k] ? 1 : 0;
                }
            }
            REQUIRE(c.frr[k] == static_cast<double>(rejected_pos) / pos);
            REQUIRE(c.fpr[k] == static_cast<double>(accepted_neg) / neg);
            REQUIRE(c.ar[k] == est[k].accept_fraction);
            if (k > 0) {
                REQUIRE(c.frr[k] >= c.frr[k - 1]);
                REQUIRE(c.fpr[k] <= c.fpr[k - 1]);
                REQUIRE(c.ar[k] <= c.ar[k - 1]);
            }
        }
    }
}

TEST_CASE("EER on a four-point grid") {
    ThresholdCurve c;
    c.thresholds = {0.0, 0.25, 0.5, 0.75};
    c.frr = {0, 0.1, 0.5, 1};
    c.fpr = {1, 0.4, 0.1, 0};
    c.ar = {1, 0.6, 0.3, 0.1};
    const auto e = find_eer(c);
    CHECK(e.index == 1);
    CHECK(e.threshold == 0.25);
    CHECK(e.discrepancy == doctest::Approx(0.3));
    CHECK(e.ar == 0.6);

    c.frr = {0, 0.2, 0.5, 1};
    c.fpr = {1, 0.6, 0.5, 0};
    CHECK(find_eer(c).index == 2);
    CHECK(find_eer(c).discrepancy == 0.0);
}

TEST_CASE("EER agrees with a linear scan on random curves, ties to the lowest index") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(s);
        ThresholdCurve c;
        const std::size_t T = 2 + s % 30;
        for (std::size_t k = 0; k < T; ++k) {
            c.thresholds.push_back(static_cast<double>(k) / T);
            // coarse values so ties happen
            c.frr.push_back(std::floor(uniform01(rng) * 5) / 4);
            c.fpr.push_back(std::floor(uniform01(rng) * 5) / 4);
        }
        std::size_t best = 0;
        for (std::size_t k = 0; k < T; ++k) {
            if (std::abs(c.frr[k] - c.fpr[k]) < std::abs(c.frr[best] - c.fpr[best])) best = k;
        }
        REQUIRE(find_eer(c).index == best);
    }
    CHECK_THROWS_AS(find_eer(ThresholdCurve{}), InvalidInput);
}

TEST_CASE("binned volume: 35 filled bins of 100") {
    std::vector<double> rows;
    for (int b = 0; b < 35; ++b) rows.push_back((b + 0.5) / 100.0);
    const auto r = measure_region_volume(rows, 1, 100, 0, VolumeMode::Binned);
    CHECK(r.alpha == std::vector<std::size_t>{35});
    CHECK(r.log10_volume == std::log10(0.35));
}

TEST_CASE("binned volume: full cube and the cutoff") {
    std::vector<double> rows;
    for (int b = 0; b < 10; ++b) rows.insert(rows.end(), {(b + 0.5) / 10.0, (b + 0.5) / 10.0});
    CHECK(measure_region_volume(rows, 2, 10, 0, VolumeMode::Binned).log10_volume == 0.0);
    // every bin holds one value; cutoff 1 needs two
    const auto r = measure_region_volume(rows, 2, 10, 1, VolumeMode::Binned);
    CHECK(r.alpha == std::vector<std::size_t>{0, 0});
    CHECK(r.log10_volume == -std::numeric_limits<double>::infinity());
    CHECK(bin_index(1.0, 10) == 9);
    CHECK(bin_index(-0.2, 10) == 0);
    CHECK(bin_index(0.1, 10) == 1);
}

TEST_CASE("half-range samples stay under the 2^-n bound") {
    Rng rng(3);
    const std::size_t n = 20;
    std::vector<double> rows(400 * n);
    for (double& v : rows) v = 0.5 * uniform01(rng);
    const auto r = measure_region_volume(rows, n, 100, 0, VolumeMode::Binned);
    CHECK(r.log10_volume <= -20 * std::log10(2.0) + 0.5);
    double sum = 0.0;
    for (auto a : r.alpha) sum += std::log10(static_cast<double>(a) / 100.0);
    CHECK(r.log10_volume == sum);
}

TEST_CASE("span volume is never below binned volume") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(s);
        const std::size_t n = 1 + s % 8, m = 3 + s % 40;
        std::vector<double> rows(n * m);
        for (double& v : rows) v = std::pow(uniform01(rng), 1 + s % 3);
        for (std::size_t cut : {0, 1, 2}) {
            const auto b = measure_region_volume(rows, n, 100, cut, VolumeMode::Binned);
            const auto sp = measure_region_volume(rows, n, 100, cut, VolumeMode::Span);
            REQUIRE(sp.log10_volume >= b.log10_volume);
            for (auto a : sp.alpha) REQUIRE(a <= 100);
            REQUIRE(sp.log10_volume <= 0.0);
        }
    }
}

TEST_CASE("region volume rejects empty or ragged samples") {
    CHECK_THROWS_AS(measure_region_volume(std::vector<double>{}, 2, 10, 0, VolumeMode::Binned),
                    InvalidInput);
    CHECK_THROWS_AS(measure_region_volume(std::vector<double>{0.1, 0.2, 0.3}, 2, 10, 0,
                                          VolumeMode::Binned),
                    InvalidInput);
}

TEST_CASE("overlap: self, disjoint and a brute-force 2-D oracle") {
    Rng rng(8);
    std::vector<double> a(2 * 30), b(2 * 30);
    for (double& v : a) v = 0.6 * uniform01(rng);
    for (double& v : b) v = 0.3 + 0.7 * uniform01(rng);
    for (auto mode : {VolumeMode::Binned, VolumeMode::Span}) {
        CHECK(region_overlap(a, a, 2, 20, 0, mode) ==
              measure_region_volume(a, 2, 20, 0, mode).log10_volume);
    }
    std::vector<double> lo(10, 0.1), hi(10, 0.9);
    CHECK(region_overlap(lo, hi, 2, 10, 0, VolumeMode::Span) ==
          -std::numeric_limits<double>::infinity());

    double expected = 0.0;
    for (std::size_t f = 0; f < 2; ++f) {
        std::set<std::size_t> fa, fb;
        for (std::size_t r = 0; r < 30; ++r) {
            fa.insert(static_cast<std::size_t>(a[2 * r + f] * 20));
            fb.insert(static_cast<std::size_t>(b[2 * r + f] * 20));
        }
        std::size_t shared = 0;
        for (auto k : fa) shared += fb.count(k);
        expected += std::log10(shared / 20.0);
    }
    CHECK(region_overlap(a, b, 2, 20, 0, VolumeMode::Binned) == doctest::Approx(expected));
    CHECK_THROWS_AS(region_overlap(a, std::vector<double>{0.1, 0.2, 0.3}, 2, 20, 0, VolumeMode::Binned),
                    InvalidInput);
}
