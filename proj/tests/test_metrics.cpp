#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "piml/metrics.hpp"
#include "piml/rng.hpp"

using namespace piml;

TEST_CASE("mape hand-checked oracles") {
    CHECK(mape({100.0, 200.0}, {100.0, 200.0}) == doctest::Approx(0.0));
    CHECK(mape({100.0, 200.0}, {90.0, 220.0}) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(mape({50.0}, {60.0}) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("mape excludes near-zero actual values and reports the count") {
    std::size_t excluded = 0;
    double v = mape({0.0, 1e-12, 100.0}, {5.0, 5.0, 110.0}, &excluded);
    CHECK(excluded == 2);
    CHECK(v == doctest::Approx(10.0).epsilon(1e-12));
    CHECK_THROWS_AS(mape({0.0, 0.0}, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(mape({1.0, 2.0}, {1.0}), DataError);
}

TEST_CASE("r_squared definitional anchors") {
    std::vector<double> y{3.0, 5.0, 9.0, 11.0};
    CHECK(r_squared(y, y) == doctest::Approx(1.0));
    double mean = std::accumulate(y.begin(), y.end(), 0.0) / 4.0;
    CHECK(r_squared(y, {mean, mean, mean, mean}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(r_squared({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), DataError);
    CHECK_THROWS_AS(r_squared({1.0}, {1.0}), DataError);
}

TEST_CASE("r_squared matches a brute-force computation on random data") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> y, yhat;
        for (int i = 0; i < 40; ++i) {
            y.push_back(rng.uniform(1.0, 100.0));
            yhat.push_back(y.back() + rng.normal());
        }
        double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double ss_res = 0.0, ss_tot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
            ss_tot += (y[i] - mean) * (y[i] - mean);
        }
        CHECK(r_squared(y, yhat) ==
              doctest::Approx(1.0 - ss_res / ss_tot).epsilon(1e-12));
    }
}

TEST_CASE("student-t critical values match published tables") {
    CHECK(student_t_critical(4.0) == doctest::Approx(2.7764451051977987).epsilon(1e-9));
    CHECK(student_t_critical(9.0) == doctest::Approx(2.2621571628540993).epsilon(1e-9));
    // Normal-limit check: df = 999 approaches the z value 1.960.
    CHECK(std::fabs(student_t_critical(999.0) - 1.960) < 1e-2);
    CHECK(student_t_critical(999.0) ==
          doctest::Approx(1.9623414611334487).epsilon(1e-8));
}

TEST_CASE("t inverter round-trips through the CDF") {
    for (double df : {1.0, 4.0, 9.0, 27.0, 100.0}) {
        double t = student_t_critical(df, 0.95);
        CHECK(std::fabs(student_t_cdf(t, df) - 0.975) < 1e-9);
    }
    CHECK(student_t_cdf(2.0, 7.0) == doctest::Approx(0.9571903357185121).epsilon(1e-12));
    CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5));
    CHECK(student_t_cdf(-2.0, 7.0) ==
          doctest::Approx(1.0 - 0.9571903357185121).epsilon(1e-9));
}

TEST_CASE("confidence interval on a hand-checked sample") {
    auto ci = confidence_interval({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(ci.mean == doctest::Approx(3.0));
    CHECK(ci.half_width == doctest::Approx(1.9632431614775607).epsilon(1e-9));
    CHECK(confidence_interval({7.0, 7.0, 7.0}).half_width == doctest::Approx(0.0));
    CHECK_THROWS_AS(confidence_interval({1.0}), DataError);
}

TEST_CASE("confidence half-width shrinks as 1/sqrt(n) up to the t* ratio") {
    std::vector<double> base{4.0, 7.0, 1.0, 9.0, 6.0, 3.0, 8.0, 2.0, 5.0, 5.5};
    std::vector<double> quadrupled;
    for (int r = 0; r < 4; ++r) quadrupled.insert(quadrupled.end(), base.begin(), base.end());
    const auto n = static_cast<double>(base.size());
    auto small = confidence_interval(base);
    auto large = confidence_interval(quadrupled);
    // Duplicating 4x: mean unchanged, s' = s*sqrt(4(n-1)/(4n-1)), sqrt(n) doubles.
    double expected_ratio = student_t_critical(4.0 * n - 1.0) / student_t_critical(n - 1.0) *
                            0.5 * std::sqrt(4.0 * (n - 1.0) / (4.0 * n - 1.0));
    CHECK(large.mean == doctest::Approx(small.mean).epsilon(1e-12));
    CHECK(large.half_width / small.half_width ==
          doctest::Approx(expected_ratio).epsilon(1e-9));
}

TEST_CASE("metrics are invariant under identical reordering of both sequences") {
    Rng rng(123);
    std::vector<double> y, yhat;
    for (int i = 0; i < 64; ++i) {
        y.push_back(rng.uniform(5.0, 50.0));
        yhat.push_back(y.back() * rng.uniform(0.9, 1.1));
    }
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);
    std::vector<double> y2, yhat2;
    for (auto i : order) {
        y2.push_back(y[i]);
        yhat2.push_back(yhat[i]);
    }
    CHECK(mape(y2, yhat2) == doctest::Approx(mape(y, yhat)).epsilon(1e-12));
    CHECK(r_squared(y2, yhat2) == doctest::Approx(r_squared(y, yhat)).epsilon(1e-12));
}

TEST_CASE("youngs_modulus recovers an exact Hooke slope and is homogeneous") {
    StressStrainCurve c;
    for (int i = 1; i <= 20; ++i) {
        c.strain.push_back(0.001 * i);
        c.stress.push_back(1000.0 * 0.001 * i);
    }
    CHECK(youngs_modulus(c, 0.015) == doctest::Approx(1000.0).epsilon(1e-9));
    StressStrainCurve doubled = c;
    for (double& s : doubled.stress) s *= 2.0;
    CHECK(youngs_modulus(doubled, 0.015) == doctest::Approx(2000.0).epsilon(1e-9));
    CHECK_THROWS_AS(youngs_modulus(c, 0.001), DataError);  // only 0 points below
}

TEST_CASE("ultimate tensile strength is the curve maximum") {
    StressStrainCurve mono;
    mono.strain = {0.1, 0.2, 0.3};
    mono.stress = {1.0, 2.0, 3.0};
    CHECK(ultimate_tensile_strength(mono) == doctest::Approx(3.0));

    StressStrainCurve peaked;
    peaked.strain = {0.1, 0.2, 0.3, 0.4};
    peaked.stress = {1.0, 5.0, 4.0, 2.0};
    CHECK(ultimate_tensile_strength(peaked) == doctest::Approx(5.0));

    Rng rng(7);
    StressStrainCurve random;
    double best = -1.0;
    for (int i = 0; i < 50; ++i) {
        random.strain.push_back(0.001 * (i + 1));
        random.stress.push_back(rng.uniform(0.0, 100.0));
        best = std::max(best, random.stress.back());
    }
    CHECK(ultimate_tensile_strength(random) == doctest::Approx(best));
    CHECK_THROWS_AS(ultimate_tensile_strength(StressStrainCurve{}), DataError);
}

TEST_CASE("aggregate table is consistent with its member records") {
    std::vector<SampleMetrics> rows(6);
    for (int i = 0; i < 6; ++i) {
        rows[i].sample_id = "s" + std::to_string(i);
        rows[i].fold = i % 3;
        rows[i].mape_whole = 1.0 + i;
        rows[i].r2 = 0.9 + 0.01 * i;
    }
    MetricReport rep = build_metric_report(rows);
    REQUIRE(rep.aggregates.count("mape_whole") == 1);
    const auto& agg = rep.aggregates.at("mape_whole");
    CHECK(agg.n == 6);
    CHECK(agg.mean == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(agg.half_width >= 0.0);
    CHECK(rep.aggregates.at("r2").mean == doctest::Approx(0.925).epsilon(1e-12));
}
