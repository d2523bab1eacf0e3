#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "woc/crowdstats.hpp"
#include "woc/error.hpp"

using namespace woc;
using namespace woc::crowdstats;

namespace {

const std::vector<double> kTwelve = {1180.625, 1236.25, 1290.875, 1335.5,  1372.125, 1401.75,
                                     1433.375, 1468.25, 1497.0625, 1532.75, 1588.5,   1642.3125};

// Oracle: tests/oracles/derive.py (exact rational arithmetic over every subset).
const std::size_t kMeanHits[13] = {0, 1, 11, 37, 94, 185, 245, 247, 174, 92, 33, 7, 1};
const std::size_t kMedianHits[13] = {0, 1, 11, 30, 95, 150, 227, 200, 161, 75, 31, 6, 1};

}  // namespace

TEST_CASE("acceptance range is closed") {
    const AcceptanceRange r;
    CHECK(in_range(1426.0, r));
    CHECK(in_range(1411.0, r));
    CHECK(in_range(1441.0, r));
    CHECK_FALSE(in_range(1410.99, r));
    CHECK_FALSE(in_range(1441.01, r));
    CHECK_THROWS_AS((AcceptanceRange{1500, 1400, 1426}.validate()), Error);
}

TEST_CASE("aggregators") {
    CHECK(aggregate(std::vector<double>{1420, 1430}, Aggregator::mean()) == 1425.0);
    CHECK(aggregate(std::vector<double>{1420, 1e6, 1426}, Aggregator::median()) == 1426.0);
    CHECK(aggregate(std::vector<double>{1000, 1420, 1430, 9999}, Aggregator::trimmed_mean(0.25)) == 1425.0);
    CHECK(Aggregator::parse("trimmed_mean(0.25)") == Aggregator::trimmed_mean(0.25));
    CHECK(Aggregator::trimmed_mean(0.25).name() == "trimmed_mean(0.25)");
    CHECK(Aggregator::parse("median") == Aggregator::median());
    CHECK_THROWS_AS(Aggregator::parse("mode"), Error);
    CHECK_THROWS_AS(Aggregator::trimmed_mean(0.5), Error);
    CHECK_THROWS_AS(aggregate(std::vector<double>{}, Aggregator::mean()), Error);
}

TEST_CASE("exhaustive enumeration matches the rational oracle") {
    for (std::size_t k = 1; k <= 12; ++k) {
        CAPTURE(k);
        CHECK(kernels::exhaustive_hits(kTwelve, k, Aggregator::mean(), {}) == kMeanHits[k]);
        CHECK(kernels::exhaustive_hits(kTwelve, k, Aggregator::median(), {}) == kMedianHits[k]);
    }
}

TEST_CASE("small worked examples") {
    const std::vector<double> v = {1420, 1430, 1500};
    const auto k2 = accuracy_at_size(v, 2, Aggregator::mean(), {});
    CHECK(k2.exhaustive);
    CHECK(k2.trials == 3);
    CHECK(k2.accuracy == doctest::Approx(1.0 / 3.0));
    CHECK(accuracy_at_size(v, 3, Aggregator::mean(), {}).accuracy == 0.0);
    const std::vector<double> flat(10, 1426.0);
    for (std::size_t k = 1; k <= 10; ++k) CHECK(accuracy_at_size(flat, k, Aggregator::mean(), {}).accuracy == 1.0);
}

TEST_CASE("invalid subset sizes") {
    const std::vector<double> v = {1, 2, 3};
    for (std::size_t k : {std::size_t{0}, std::size_t{4}}) {
        try {
            accuracy_at_size(v, k, Aggregator::mean(), {});
            FAIL("expected InvalidK");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidK);
        }
    }
}

TEST_CASE("monte carlo agrees with enumeration and reports its standard error") {
    SamplingOptions mc;
    mc.trials = 20000;
    mc.seed = 17;
    mc.exhaustive_cap = 0;
    for (std::size_t k = 2; k <= 11; ++k) {
        const auto est = accuracy_at_size(kTwelve, k, Aggregator::mean(), {}, mc);
        const double exact = static_cast<double>(kMeanHits[k]) / static_cast<double>(binomial_capped(12, k, 1000));
        CAPTURE(k);
        CHECK_FALSE(est.exhaustive);
        CHECK(est.trials == 20000);
        CHECK(std::abs(est.accuracy - exact) < 0.02);
        CHECK(est.std_error == doctest::Approx(std::sqrt(est.accuracy * (1 - est.accuracy) / 20000)));
    }
}

TEST_CASE("serial and parallel kernels count the same hits") {
    std::vector<double> values;
    for (int i = 0; i < 3000; ++i) values.push_back(1000.0 + std::fmod(i * 7.31, 900.0));
    std::sort(values.begin(), values.end());
    for (std::size_t k : {1, 2, 50, 1499, 1500, 1501, 2999, 3000}) {
        CAPTURE(k);
        CHECK(kernels::monte_carlo_hits_serial(values, k, 500, 3, Aggregator::mean(), {}) ==
              kernels::monte_carlo_hits_parallel(values, k, 500, 3, Aggregator::mean(), {}));
        CHECK(kernels::monte_carlo_hits_serial(values, k, 200, 3, Aggregator::median(), {}) ==
              kernels::monte_carlo_hits_parallel(values, k, 200, 3, Aggregator::median(), {}));
    }
}

TEST_CASE("execution mode does not change results") {
    std::vector<double> values;
    for (int i = 0; i < 400; ++i) values.push_back(1200.0 + (i * 37) % 450);
    SamplingOptions serial{300, 5, 0, Execution::Serial};
    SamplingOptions parallel{300, 5, 0, Execution::Parallel};
    CHECK(sweep(values, {10, 100, 200}, Aggregator::mean(), {}, serial).points ==
          sweep(values, {10, 100, 200}, Aggregator::mean(), {}, parallel).points);
}

TEST_CASE("binomial with saturation") {
    CHECK(binomial_capped(12, 6, 1000) == 924);
    CHECK(binomial_capped(12, 0, 1000) == 1);
    CHECK(binomial_capped(3, 4, 1000) == 0);
    CHECK(binomial_capped(15064, 538, 100000) == 100001);
    CHECK(binomial_capped(60, 30, ~0ULL - 1) == 118264581564861424ULL);
}

TEST_CASE("default grid") {
    const auto g = default_grid(15064);
    REQUIRE(g.size() == 28);
    for (std::size_t m = 1; m <= 28; ++m) CHECK(g[m - 1] == 538 * m);
    CHECK(default_grid(10) == std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
}

TEST_CASE("sweep sorts grids, dedupes and is reproducible") {
    std::vector<double> values;
    for (int i = 0; i < 200; ++i) values.push_back(1300.0 + (i * 13) % 250);
    SamplingOptions opt;
    opt.seed = 4;
    const auto a = sweep(values, {50, 10, 50, 200}, Aggregator::mean(), {}, opt);
    const auto b = sweep(values, {10, 50, 200}, Aggregator::mean(), {}, opt);
    CHECK(a == b);
    REQUIRE(a.points.size() == 3);
    CHECK(a.points[0].k == 10);
    CHECK((a.points[2].accuracy == 0.0 || a.points[2].accuracy == 1.0));
    CHECK(a.meta.population == 200);
    CHECK(a.meta.seed == 4);
    CHECK_THROWS_AS(sweep(std::vector<double>{}, {1}, Aggregator::mean(), {}), Error);
}

TEST_CASE("find_optimal picks the smallest k within epsilon of the maximum") {
    AccuracyCurve c;
    c.points = {{10, 0.50}, {20, 0.90}, {30, 0.91}, {40, 0.91}};
    CHECK(find_optimal(c, 0.01).k_star == 20);
    CHECK(find_optimal(c, 0.0).k_star == 30);
    CHECK(find_optimal(c, 0.01).max_accuracy == 0.91);
    AccuracyCurve single;
    single.points = {{538, 0.37}};
    CHECK(find_optimal(single, 0.005).k_star == 538);
    CHECK_THROWS_AS(find_optimal(AccuracyCurve{}, 0.01), Error);
}

TEST_CASE("curve files round-trip byte-exactly") {
    std::vector<double> values;
    for (int i = 0; i < 300; ++i) values.push_back(1350.0 + (i * 29) % 160 + 0.1 * (i % 7));
    SamplingOptions opt;
    opt.seed = 2;
    auto curve = sweep(values, default_grid(values.size()), Aggregator::trimmed_mean(0.1), {}, opt);
    curve.meta.label = "fixture";
    curve.meta.response_level_accuracy = response_level_accuracy(values, {});
    test::TempDir dir("curve");
    save_curve(curve, dir / "c.csv");
    const auto back = load_curve(dir / "c.csv");
    CHECK(back == curve);
    save_curve(back, dir / "d.csv");
    CHECK(test::slurp(dir / "c.csv") == test::slurp(dir / "d.csv"));
    CHECK(test::slurp(dir / "c.json") == test::slurp(dir / "d.json"));
    CHECK(test::slurp(dir / "c.csv").rfind("k,accuracy,stderr,trials,exhaustive\n", 0) == 0);
}
