#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "patharea/limits.hpp"
#include "patharea/polyomino.hpp"

using namespace patharea;

TEST(Polyomino, SmallHalfPerimeters) {
    const auto counts = cc_enumerate(8);
    EXPECT_EQ(counts.count(2, 1), 1);
    EXPECT_EQ(counts.count(3, 2), 2);
    EXPECT_EQ(counts.count(4, 3), 6);
    EXPECT_EQ(counts.count(4, 4), 1);
    const std::vector<long> totals{1, 2, 7, 28, 122, 558, 2641};
    for (int hp = 2; hp <= 8; ++hp) EXPECT_EQ(counts.total(hp), totals[static_cast<std::size_t>(hp - 2)]) << hp;
    EXPECT_EQ(counts.total(1), 0);
    EXPECT_EQ(counts.at(5, 4, 5), 0);
}

TEST(Polyomino, AreaBoundsArePlausible) {
    const auto counts = cc_enumerate(12);
    for (int hp = 2; hp <= 12; ++hp) {
        EXPECT_GT(counts.count(hp, hp - 1), 0) << hp;
        EXPECT_GT(counts.count(hp, cc_max_area(hp)), 0) << hp;
        EXPECT_EQ(counts.count(hp, cc_max_area(hp) + 1), 0) << hp;
        for (std::int64_t a = 0; a < hp - 1; ++a) EXPECT_EQ(counts.count(hp, a), 0) << hp << " " << a;
    }
}

TEST(Polyomino, ColumnDpMatchesBruteForce) {
    const auto counts = cc_enumerate(7);
    const auto brute = cc_brute_oracle(10);
    for (int hp = 2; hp <= 7; ++hp)
        for (std::int64_t a = 0; a <= std::min<std::int64_t>(10, cc_max_area(hp)); ++a) {
            const auto it = brute.find({hp, static_cast<int>(a)});
            EXPECT_EQ(it == brute.end() ? Integer(0) : it->second, counts.count(hp, a)) << hp << " " << a;
        }
    for (const auto& [key, c] : brute) {
        if (key.first <= 7) {
            EXPECT_EQ(c, counts.count(key.first, key.second));
        }
    }
}

TEST(Polyomino, FunctionalEquationSeriesMatchesDp) {
    const auto fe = cc_series_from_functional_equation(18);
    EXPECT_EQ(fe.counts, cc_enumerate(18));
    EXPECT_GE(fe.sweeps, 1);
}

TEST(Polyomino, StructuralConstants) {
    const auto p = cc_structural_constants();
    EXPECT_GT(p.rho, 0);
    EXPECT_LT(p.rho, 1);
    EXPECT_GT(p.tau, 1);
    EXPECT_LT(p.rho * p.tau, 1);
    EXPECT_NEAR(p.rho * p.s_tau, 1, 1e-12);
    EXPECT_FALSE(p.gamma.has_value());
    // exponential growth of the counts: c_{n+1}/c_n = (1 - 3/(2n) + O(n^-2)) / rho
    const auto counts = cc_enumerate(61);
    const double n = 60;
    const double ratio = to_double(Rational(counts.total(61), counts.total(60)));
    EXPECT_NEAR(ratio * (1 + 1.5 / n) * p.rho, 1, 5e-3);
}

TEST(Polyomino, AreaMomentsAgreeWithCounts) {
    const auto counts = cc_enumerate(20);
    const auto moments = cc_area_moments(20, 3, 1);
    for (int hp = 2; hp <= 20; ++hp) {
        Integer total = 0;
        std::vector<Integer> raw(4);
        Integer by_height = 0;
        for (std::int64_t a = 0; a <= cc_max_area(hp); ++a) {
            const Integer c = counts.count(hp, a);
            total += c;
            Integer p = 1;
            for (int n = 0; n <= 3; ++n, p *= static_cast<long>(a)) raw[static_cast<std::size_t>(n)] += c * p;
            for (int h = 1; h < hp; ++h) by_height += counts.at(hp, a, h) * h;
        }
        EXPECT_EQ(moments.total(hp), Rational(total)) << hp;
        for (int n = 0; n <= 3; ++n) EXPECT_EQ(moments.raw(hp, n, 0), Rational(raw[static_cast<std::size_t>(n)])) << hp;
        EXPECT_EQ(moments.raw(hp, 0, 1), Rational(by_height)) << hp;
    }
}

TEST(Polyomino, MeanAreaMatchesOracleAtHalfPerimeterSix) {
    const auto brute = cc_brute_oracle(9);
    Integer total = 0, sum = 0;
    for (const auto& [key, c] : brute)
        if (key.first == 6) {
            total += c;
            sum += c * key.second;
        }
    Rational want(sum, total);
    want.canonicalize();
    EXPECT_EQ(cc_area_moments(6, 1).expectation(6, 1, 0), want);
}

TEST(Polyomino, RescaledMeanApproachesExcursionArea) {
    const auto p = cc_structural_constants();
    const double bea = limiting_moment(MomentKind::BEA, {1}).to_double();
    const auto moments = cc_area_moments(60, 1);
    double prev = 1;
    for (int hp : {15, 30, 60}) {
        const double e = to_double(moments.expectation(hp, 1, 0));
        const double err = std::fabs(p.area_scale * e / std::pow(hp, 1.5) - bea) / bea;
        EXPECT_LT(err, prev) << hp;
        prev = err;
    }
}

TEST(Polyomino, OrdersAreValidated) {
    EXPECT_THROW(cc_enumerate(201), Error);
    EXPECT_THROW(cc_brute_oracle(13), Error);
    EXPECT_THROW(cc_series_from_functional_equation(41), Error);
    EXPECT_THROW(cc_area_moments(10, 61), Error);
    try {
        cc_area_moments(1500, 20, 0, MemoryBudget{1 << 20});
        FAIL() << "expected a budget error";
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::resource);
    }
}

TEST(Polyomino, CsvWriters) {
    std::ostringstream os;
    write_cc_counts_csv(os, cc_enumerate(3));
    EXPECT_EQ(os.str(), "hp,area,count\n2,1,1\n3,2,2\n");
}
