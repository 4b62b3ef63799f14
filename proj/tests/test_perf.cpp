#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "perfcon/perf.hpp"

using namespace perfcon;

namespace {

// Magnus formula recomputed independently in extended precision.
long double vapor_pressure_independent(long double t_c, long double rh_pct) {
    long double saturation = 6.1094L * std::exp(17.625L * t_c / (t_c + 243.04L));
    return rh_pct / 100.0L * saturation;
}

}  // namespace

TEST_CASE("energy performance is the plain consumption ratio") {
    CHECK(energy_performance(45.0, 45.0) == 1.0);
    CHECK(energy_performance(0.0, 45.0) == 0.0);
    CHECK(energy_performance(90.0, 45.0) == 2.0);
}

TEST_CASE("comfort ratio is actual over baseline") {
    CHECK(comfort_ratio(21.0, 21.0) == 1.0);
    CHECK(comfort_ratio(18.9, 21.0) == Catch::Approx(0.9).epsilon(1e-15));
    CHECK(comfort_ratio(1200.0, 1000.0) == Catch::Approx(1.2).epsilon(1e-15));
}

TEST_CASE("ratio homogeneity under common scaling") {
    rng g(11);
    for (int i = 0; i < 2000; ++i) {
        double x = 0.1 + 100.0 * g.unit();
        double x0 = 0.1 + 100.0 * g.unit();
        // powers of two scale exactly
        double k2 = std::ldexp(1.0, static_cast<int>(g.below(20)) - 10);
        CHECK(comfort_ratio(k2 * x, k2 * x0) == comfort_ratio(x, x0));
        double k = 0.01 + 10.0 * g.unit();
        CHECK(comfort_ratio(k * x, k * x0) == Catch::Approx(comfort_ratio(x, x0)).epsilon(1e-12));
        CHECK(energy_performance(k * x, k * x0) == Catch::Approx(energy_performance(x, x0)).epsilon(1e-12));
    }
}

TEST_CASE("interval average") {
    std::vector<double> one = {21.0};
    std::vector<double> two = {20.0, 22.0};
    std::vector<double> none;
    CHECK(interval_average(one) == 21.0);
    CHECK(interval_average(two) == 21.0);
    CHECK_FALSE(interval_average(none).has_value());
}

TEST_CASE("window ratio from exact milli sums") {
    CHECK(window_ratio(18'900, 1, 21'000) == Catch::Approx(0.9).epsilon(1e-15));
    CHECK(window_ratio(42'000, 2, 21'000) == 1.0);
    CHECK_FALSE(window_ratio(0, 0, 21'000).has_value());
}

TEST_CASE("vapor pressure anchor points") {
    CHECK(vapor_pressure(0.0, 100.0) == Catch::Approx(6.1094).margin(1e-12));
    for (double t : {-20.0, 0.0, 15.0, 21.0, 35.0})
        CHECK(vapor_pressure(t, 0.0) == 0.0);
}

TEST_CASE("vapor pressure matches an independent evaluation to 1e-9 relative") {
    for (double t = -10.0; t <= 35.0; t += 1.7) {
        for (double rh = 5.0; rh <= 100.0; rh += 12.5) {
            double got = vapor_pressure(t, rh);
            long double want = vapor_pressure_independent(t, rh);
            CHECK(std::fabsl(got - want) <= 1e-9L * std::fabsl(want));
        }
    }
    // the paper's test-setup operating point
    double got = vapor_pressure(21.0, 40.0);
    long double want = vapor_pressure_independent(21.0L, 40.0L);
    CHECK(std::fabsl(got - want) <= 1e-9L * want);
}

TEST_CASE("pmv is the linear form a*T + b*Pv - c") {
    CHECK(pmv(21.0, 123.0, {1.0, 0.0, 0.0}) == 21.0);
    CHECK(pmv(30.0, 9.0, {0.0, 0.0, 1.5}) == -1.5);
    // additivity in T at b = c = 0
    CHECK(pmv(8.0 + 13.0, 0.0, {0.25, 0.0, 0.0}) == pmv(8.0, 0.0, {0.25, 0.0, 0.0}) + pmv(13.0, 0.0, {0.25, 0.0, 0.0}));
}

TEST_CASE("pmv finite-difference slopes recover a and b to 1e-12") {
    rng g(77);
    for (int i = 0; i < 1000; ++i) {
        pmv_coefficients k{g.unit() * 4.0 - 2.0, g.unit() * 4.0 - 2.0, g.unit() * 4.0 - 2.0};
        double t = g.unit() * 40.0 - 5.0;
        double pv = g.unit() * 40.0;
        double slope_t = pmv(t + 1.0, pv, k) - pmv(t, pv, k);
        double slope_pv = pmv(t, pv + 1.0, k) - pmv(t, pv, k);
        CHECK(std::fabs(slope_t - k.a) <= 1e-12 * std::max(1.0, std::fabs(k.a)));
        CHECK(std::fabs(slope_pv - k.b) <= 1e-12 * std::max(1.0, std::fabs(k.b)));
    }
}

TEST_CASE("classification of missing data fails") {
    comfort_bands b;
    CHECK(classify_metric(std::nullopt, b.temperature) == tier::fail);
    CHECK(classify_metric(std::nullopt, b.co2) == tier::fail);
}

TEST_CASE("band boundaries classify with the exact inclusivity") {
    comfort_bands b;
    const double eps = 1e-9;

    struct probe {
        const band_limits& band;
        double ratio;
        tier at, below, above;
    };
    // each finite endpoint probed exactly and one billionth to each side
    const probe probes[] = {
        {b.temperature, 0.8, tier::reduced, tier::fail, tier::reduced},
        {b.temperature, 0.9, tier::full, tier::reduced, tier::full},
        {b.temperature, 1.1, tier::full, tier::full, tier::reduced},
        {b.temperature, 1.2, tier::reduced, tier::reduced, tier::fail},
        {b.humidity, 0.4, tier::reduced, tier::fail, tier::reduced},
        {b.humidity, 0.75, tier::full, tier::reduced, tier::full},
        {b.humidity, 1.5, tier::full, tier::full, tier::reduced},
        {b.humidity, 1.8, tier::reduced, tier::reduced, tier::fail},
        {b.co2, 1.0, tier::full, tier::full, tier::reduced},
        {b.co2, 1.1, tier::reduced, tier::reduced, tier::fail},
    };
    for (const probe& p : probes) {
        CAPTURE(p.ratio);
        CHECK(classify_metric(p.ratio, p.band) == p.at);
        CHECK(classify_metric(p.ratio - eps, p.band) == p.below);
        CHECK(classify_metric(p.ratio + eps, p.band) == p.above);
    }
}

TEST_CASE("classification is total and exclusive over random ratios") {
    comfort_bands bands;
    rng g(4242);
    for (metric m : comfort_metrics) {
        const band_limits& b = bands.of(m);
        for (int i = 0; i < 100'000; ++i) {
            double r = g.unit() * 3.0;
            tier t = classify_metric(r, b);
            bool in_full = r >= b.full_lo && r <= b.full_hi;
            bool in_reduced = !in_full && r >= b.reduced_lo && r <= b.reduced_hi;
            tier want = in_full ? tier::full : in_reduced ? tier::reduced : tier::fail;
            REQUIRE(t == want);
        }
    }
}

TEST_CASE("facility manager rule over all 27 tier combinations") {
    const tier tiers[] = {tier::full, tier::reduced, tier::fail};
    rational rf{1, 2};
    for (tier a : tiers)
        for (tier b : tiers)
            for (tier c : tiers) {
                int greens = (a == tier::full) + (b == tier::full) + (c == tier::full);
                int reds = (a == tier::fail) + (b == tier::fail) + (c == tier::fail);
                tier want = greens >= 2 ? tier::full : reds >= 2 ? tier::fail : tier::reduced;
                CHECK(fm_outcome(a, b, c) == want);
                // permutation symmetry: the rule counts colors only
                CHECK(fm_outcome(a, c, b) == fm_outcome(a, b, c));
                CHECK(fm_outcome(b, a, c) == fm_outcome(a, b, c));
                CHECK(fm_outcome(c, b, a) == fm_outcome(a, b, c));
                rational f = tier_fraction(fm_outcome(a, b, c), rf);
                if (want == tier::full)
                    CHECK(f == rational{1, 1});
                else if (want == tier::fail)
                    CHECK(f == rational{0, 1});
                else
                    CHECK(f == rf);
            }
    // the literal precedence keeps (full, full, fail) at full reward
    CHECK(fm_outcome(tier::full, tier::full, tier::fail) == tier::full);
}

TEST_CASE("contractor policy default cells") {
    contractor_policy p;
    // energy met without sacrificing comfort pays in full
    CHECK(p.classify(0.95, 1.0) == tier::full);
    // comfort dumped to hit the energy target never pays in full
    CHECK(p.classify(0.8, 0.7) == tier::reduced);
    // heavy overconsumption while the building ran hot is excused to reduced
    CHECK(p.classify(1.6, 1.3) == tier::reduced);
    // band edges
    CHECK(p.classify(1.0, 0.8) == tier::full);
    CHECK(p.classify(1.0, 1.2) == tier::full);
    CHECK(p.classify(1.5, 1.0) == tier::reduced);
    CHECK(p.classify(1.5 + 1e-12, 1.0) == tier::fail);
    CHECK(p.classify(2.0, 1.2) == tier::fail);
    CHECK(p.classify(2.0, 1.2 + 1e-12) == tier::reduced);
}

TEST_CASE("contractor policy satisfies both prose clauses") {
    contractor_policy p;
    rng g(99);
    for (int i = 0; i < 100'000; ++i) {
        double ep = g.unit() * 3.0;
        double tc = g.unit() * 2.0;
        tier t = p.classify(ep, tc);
        if (tc < 0.8)
            CHECK(t != tier::full);
        if (ep > 1.5 && tc > 1.2)
            CHECK(t != tier::fail);
    }
}

TEST_CASE("baselines must be strictly positive") {
    CHECK(baselines{45'000, 21'000, 40'000, 1'000'000}.valid());
    CHECK_FALSE(baselines{0, 21'000, 40'000, 1'000'000}.valid());
    CHECK_FALSE(baselines{45'000, 21'000, -1, 1'000'000}.valid());
}

TEST_CASE("scale_floor keeps rounding dust") {
    CHECK(scale_floor(100, {1, 2}) == 50);
    CHECK(scale_floor(101, {1, 2}) == 50);
    CHECK(scale_floor(100, {1, 3}) == 33);
    CHECK(scale_floor(100, {1, 1}) == 100);
    CHECK(scale_floor(100, {0, 1}) == 0);
}
