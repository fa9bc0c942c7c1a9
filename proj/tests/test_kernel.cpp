#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "patharea/enumerate.hpp"
#include "patharea/kernel.hpp"

using namespace patharea;

namespace {

std::string error_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

/// sum_{m <= M} counts[m][k] z^m by Horner.
double truncated_gf(const std::vector<std::vector<Rational>>& counts, int k, double z) {
    double sum = 0;
    for (std::size_t m = counts.size(); m-- > 0;)
        sum = sum * z + (static_cast<std::size_t>(k) < counts[m].size() ? to_double(counts[m][k]) : 0.0);
    return sum;
}

const char* const kSets[] = {"-1:1,1:1", "-1:1,0:1,1:1", "-2:1,-1:1,1:1", "-2:1,-1:1,0:1,1:1,2:1",
                             "-3:1,-1:2,1:1,2:1/2"};

}  // namespace

TEST(Kernel, BranchesAreKernelRoots) {
    for (const char* spec : kSets) {
        const auto s = parse_step_set(spec);
        const auto p = structural_constants(s);
        for (double f : {0.1, 0.5, 0.9, 0.99}) {
            const auto b = branches_at(s, f * p.rho, p);
            ASSERT_EQ(b.small.size(), static_cast<std::size_t>(s.c())) << spec;
            ASSERT_EQ(b.large.size(), static_cast<std::size_t>(s.d())) << spec;
            for (const auto& u : b.small) EXPECT_LT(kernel_residual(s, b.z, u), kKernelResidual) << spec;
            for (const auto& v : b.large) EXPECT_LT(kernel_residual(s, b.z, v), kKernelResidual) << spec;
            EXPECT_LT(std::abs(b.small.back()), std::abs(b.large.front()));
            EXPECT_NEAR(b.small[0].imag(), 0, 1e-14);
            EXPECT_GT(b.small[0].real(), 0);
        }
    }
}

TEST(Kernel, SmallBranchesComeInConjugatePairs) {
    const auto s = parse_step_set("-3:1,-1:2,1:1,2:1/2");
    const auto b = branches_at(s, 0.1);
    for (const auto& u : b.small) {
        double best = 1;
        for (const auto& w : b.small) best = std::min(best, std::abs(std::conj(u) - w));
        EXPECT_LT(best, 1e-10);
    }
}

TEST(Kernel, BernoulliBranchClosedForm) {
    const auto s = parse_step_set("-1:1,1:1");
    for (double z : {0.05, 0.2, 0.4, 0.49}) {
        const double want = (1 - std::sqrt(1 - 4 * z * z)) / (2 * z);
        EXPECT_NEAR(branches_at(s, z).small[0].real(), want, 1e-13);
    }
}

TEST(Kernel, PrincipalBranchIncreasesTowardTau) {
    const auto s = parse_step_set("-2:1,-1:1,1:1");
    const auto p = structural_constants(s);
    double prev = 0;
    for (int i = 1; i <= 20; ++i) {
        const double u = branches_at(s, p.rho * i / 21.0, p).small[0].real();
        EXPECT_GT(u, prev);
        EXPECT_LT(u, p.tau);
        prev = u;
    }
}

TEST(Kernel, StructuralConstants) {
    const auto motzkin = structural_constants(parse_step_set("-1:1,0:1,1:1"));
    EXPECT_NEAR(motzkin.tau, 1, 1e-12);
    EXPECT_NEAR(motzkin.rho, 1.0 / 3, 1e-12);
    EXPECT_NEAR(motzkin.beta_puiseux, std::sqrt(3.0), 1e-9);
    EXPECT_EQ(motzkin.regime, Regime::zero_drift);
    EXPECT_EQ(motzkin.period, 1);

    const auto dyck = structural_constants(parse_step_set("-1:1,1:1"));
    EXPECT_NEAR(dyck.rho, 0.5, 1e-12);
    EXPECT_NEAR(dyck.beta_puiseux, std::sqrt(2.0), 1e-9);
    EXPECT_EQ(dyck.period, 2);

    const auto p = structural_constants(parse_step_set("-2:1,-1:1,1:1"));
    EXPECT_NEAR(p.tau, 1.52138, 1e-5);
    EXPECT_NEAR(p.rho, 0.383036, 1e-6);
    EXPECT_EQ(p.regime, Regime::negative_drift);
    EXPECT_NEAR(p.s_tau * p.rho, 1, 1e-12);
    EXPECT_GT(p.s2_tau, 0);
}

TEST(Kernel, PuiseuxExpansion) {
    const auto s = parse_step_set("-1:1,0:1,1:1");
    const auto rep = verify_puiseux(s, {0.30, 0.32, 0.333});
    EXPECT_TRUE(rep.success);
    EXPECT_TRUE(rep.decreasing);
    EXPECT_LT(rep.rows.back().deviation, 0.05 * rep.beta);
    EXPECT_EQ(error_code([&] { verify_puiseux(s, {0.1}); }), "kernel.GridOutOfRange");
    EXPECT_EQ(error_code([&] { verify_puiseux(s, {}); }), "kernel.GridOutOfRange");
}

TEST(Kernel, DomainIsChecked) {
    const auto s = parse_step_set("-1:1,0:1,1:1");
    EXPECT_EQ(error_code([&] { branches_at(s, 0.0); }), "kernel.OutOfDomain");
    EXPECT_EQ(error_code([&] { branches_at(s, 0.4); }), "kernel.OutOfDomain");
}

TEST(Kernel, MeanderSolverMatchesPathCounts) {
    for (const char* spec : kSets) {
        const auto s = parse_step_set(spec);
        const auto p = structural_constants(s);
        const double z = 0.3 * p.rho;
        constexpr int M = 80;
        const auto counts = endpoint_counts(s, PathClass::meander, M);
        const auto sol = solve_meander_gf(s, z, {1.0, 0.5}, p);
        for (int k = 0; k < s.c(); ++k) {
            const double bound = meander_truncation_bound(p, k, z, M);
            EXPECT_LT(bound, 1e-12);
            EXPECT_NEAR(sol.g_values[static_cast<std::size_t>(k)], truncated_gf(counts, k, z), 1e-10) << spec;
        }
        double total = 0, half = 0;
        for (std::size_t m = counts.size(); m-- > 0;) {
            double row = 0, row_half = 0, w = 1;
            for (const auto& c : counts[m]) {
                row += to_double(c);
                row_half += to_double(c) * w;
                w *= 0.5;
            }
            total = total * z + row;
            half = half * z + row_half;
        }
        EXPECT_NEAR(sol.f_at[0].second, total, 1e-9 * total) << spec;
        EXPECT_NEAR(sol.f_at[1].second, half, 1e-9 * half) << spec;
        EXPECT_LT(sol.max_imag, 1e-12);
        EXPECT_LT(sol.cramer_deviation, kCramerAgreement);
    }
}

TEST(Kernel, TruncationBoundDominatesTail) {
    const auto s = parse_step_set("-2:1,-1:1,1:1");
    const auto p = structural_constants(s);
    const double z = 0.5 * p.rho;
    const auto counts = endpoint_counts(s, PathClass::meander, 120);
    for (int k = 0; k < s.c(); ++k)
        for (int M : {10, 30, 60}) {
            double tail = 0;
            for (int m = 120; m > M; --m)
                if (static_cast<std::size_t>(k) < counts[m].size()) tail += to_double(counts[m][k]) * std::pow(z, m);
            EXPECT_LE(tail, meander_truncation_bound(p, k, z, M));
        }
    EXPECT_TRUE(std::isinf(meander_truncation_bound(p, 0, p.rho, 5)));
}

TEST(Kernel, AssumptionAudit) {
    const auto motzkin = assumption_report(parse_step_set("-1:1,0:1,1:1"), {0.1, 0.2, 0.3});
    EXPECT_TRUE(motzkin.all_passed());
    EXPECT_TRUE(motzkin.warnings.empty());

    const auto skip = assumption_report(parse_step_set("-2:1,2:1"), {0.1, 0.2});
    EXPECT_EQ(skip.profile.period, 4);
    EXPECT_FALSE(skip.warnings.empty());
    EXPECT_FALSE(skip.all_passed());

    const auto three = assumption_report(parse_step_set("-3:1,-1:2,1:1,2:1/2"), {0.05, 0.1});
    for (const auto& c : three.checks) {
        if (c.item == 5) {
            EXPECT_NEAR(c.value, 1, 1e-6);
        }
    }
}

TEST(Kernel, JsonExport) {
    const auto j = report_to_json(assumption_report(parse_step_set("-1:1,0:1,1:1"), {0.2}));
    EXPECT_EQ(j["regime"], "ZeroDrift");
    EXPECT_FALSE(j["checks"].empty());
}
