#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "numbers.hpp"
#include "roots.hpp"
#include "steps.hpp"

namespace patharea {

enum class Regime { negative_drift, zero_drift, positive_drift };

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::negative_drift: return "NegativeDrift";
        case Regime::zero_drift: return "ZeroDrift";
        case Regime::positive_drift: return "PositiveDrift";
    }
    return "?";
}

/// Structural constants of a kernel equation 1 = z S(u).
///
/// `beta` is sqrt(2 S / S'') at (rho, tau). `beta_puiseux` is the actual
/// amplitude of u_1(z) ~ tau - beta_puiseux sqrt(1 - z/rho); it differs from
/// `beta` only when S depends on z. `area_scale` multiplies X_m / m^{3/2} so
/// that the rescaled area tends to the excursion-area law; for a plain step
/// set it is beta / (sqrt2 tau). `altitude_scale` (beta / sqrt2) multiplies
/// H_m / sqrt(m) in the zero-drift meander limit.
struct KernelProfile {
    double tau = 0;
    double rho = 0;
    double beta = 0;
    double beta_puiseux = 0;
    double area_scale = 0;
    double altitude_scale = 0;
    std::optional<Rational> gamma;
    Regime regime = Regime::zero_drift;
    int period = 1;
    double s_tau = 0;   ///< S(rho, tau)
    double s2_tau = 0;  ///< d^2/du^2 S(rho, tau)
};

namespace detail {

inline long double step_poly(const StepSet& s, long double u, int order) {
    long double sum = 0;
    for (const auto& [k, w] : s.weights()) {
        long double f = 1;
        if (order >= 1) f *= k;
        if (order >= 2) f *= (k - 1);
        if (order >= 3) f *= (k - 2);
        sum += static_cast<long double>(to_double(w)) * f * std::pow(u, static_cast<long double>(k - order));
    }
    return sum;
}

inline Complex step_poly(const StepSet& s, Complex u) {
    Complex sum = 0;
    for (const auto& [k, w] : s.weights()) sum += to_double(w) * std::pow(u, k);
    return sum;
}

}  // namespace detail

/// tau: the unique positive zero of S'(u) (S is convex on u > 0), found by
/// bracketing u^{c+1} S'(u) and finishing with Newton steps.
inline KernelProfile structural_constants(const StepSet& s) {
    const auto ch = characteristics(s);
    auto f = [&](long double u) { return detail::step_poly(s, u, 1); };
    long double tau = 1;
    if (ch.drift != 0) {
        long double lo = 1, hi = 1;
        int guard = 0;
        if (f(1) > 0) {
            while (f(lo) > 0) {
                lo /= 2;
                if (++guard > 200) fail(ErrorCategory::numeric, "kernel.BracketFailure", "no sign change of S'");
            }
        } else {
            while (f(hi) < 0) {
                hi *= 2;
                if (++guard > 200) fail(ErrorCategory::numeric, "kernel.BracketFailure", "no sign change of S'");
            }
        }
        while (hi - lo > 1e-6L * hi) {
            const long double mid = (lo + hi) / 2;
            (f(mid) < 0 ? lo : hi) = mid;
        }
        tau = (lo + hi) / 2;
        for (int it = 0; it < 50; ++it) {
            const long double step = f(tau) / detail::step_poly(s, tau, 2);
            long double next = tau - step;
            if (!(next > lo && next < hi)) next = (lo + hi) / 2;
            (f(next) < 0 ? lo : hi) = next;
            const bool converged = std::fabs(next - tau) <= 1e-18L * next;
            tau = next;
            if (converged) break;
        }
        if (std::fabs(f(tau)) > 1e-12L)
            fail(ErrorCategory::numeric, "kernel.BracketFailure", "root of S' not resolved to 1e-12");
    }
    KernelProfile p;
    p.tau = static_cast<double>(tau);
    const long double S = detail::step_poly(s, tau, 0);
    const long double S2 = detail::step_poly(s, tau, 2);
    p.s_tau = static_cast<double>(S);
    p.s2_tau = static_cast<double>(S2);
    p.rho = static_cast<double>(1 / S);
    p.beta = static_cast<double>(std::sqrt(2 * S / S2));
    p.beta_puiseux = p.beta;
    p.area_scale = static_cast<double>(std::sqrt(2 * S / S2) / (std::sqrt(2.0L) * tau));
    p.altitude_scale = static_cast<double>(std::sqrt(S / S2));
    p.gamma = ch.drift;
    p.regime = ch.drift < 0 ? Regime::negative_drift : (ch.drift > 0 ? Regime::positive_drift : Regime::zero_drift);
    p.period = ch.period;
    return p;
}

/// Roots of the kernel at a fixed z, split into the c small and d large
/// branches. small[0] is the positive real dominant branch u_1(z).
struct BranchSet {
    double z = 0;
    std::vector<Complex> small;
    std::vector<Complex> large;
};

/// |1 - z S(u)|.
inline double kernel_residual(const StepSet& s, double z, Complex u) {
    return std::abs(1.0 - z * detail::step_poly(s, u));
}

/// Coefficients (increasing degree) of u^c - z u^c S(u).
inline std::vector<Complex> kernel_polynomial(const StepSet& s, double z) {
    std::vector<Complex> a(static_cast<std::size_t>(s.c() + s.d()) + 1);
    a[static_cast<std::size_t>(s.c())] += 1.0;
    for (const auto& [k, w] : s.weights()) a[static_cast<std::size_t>(k + s.c())] -= z * to_double(w);
    return a;
}

constexpr double kBranchGap = 1e-8;
constexpr double kKernelResidual = 1e-10;

inline BranchSet branches_at(const StepSet& s, double z, const KernelProfile& profile) {
    if (!(z > 0 && z < profile.rho))
        fail(ErrorCategory::validation, "kernel.OutOfDomain",
             "z = " + std::to_string(z) + " must lie strictly inside (0, rho = " + std::to_string(profile.rho) + ")");
    auto roots = polynomial_roots(kernel_polynomial(s, z));
    std::stable_sort(roots.begin(), roots.end(), [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
    const auto c = static_cast<std::size_t>(s.c());
    const double gap = std::abs(roots[c]) - std::abs(roots[c - 1]);
    if (gap < kBranchGap)
        fail(ErrorCategory::numeric, "kernel.ClassificationAmbiguity",
             "small/large modulus gap " + std::to_string(gap) + " at z = " + std::to_string(z));
    for (const auto& r : roots)
        if (kernel_residual(s, z, r) >= kKernelResidual)
            fail(ErrorCategory::numeric, "kernel.ResidualTooLarge",
                 "kernel residual " + std::to_string(kernel_residual(s, z, r)) + " at z = " + std::to_string(z));
    BranchSet b;
    b.z = z;
    b.small.assign(roots.begin(), roots.begin() + static_cast<long>(c));
    b.large.assign(roots.begin() + static_cast<long>(c), roots.end());
    std::size_t best = c;
    for (std::size_t i = 0; i < c; ++i) {
        const Complex u = b.small[i];
        if (u.real() > 0 && std::abs(u.imag()) <= 1e-9 * std::abs(u) &&
            (best == c || u.real() > b.small[best].real()))
            best = i;
    }
    if (best == c)
        fail(ErrorCategory::numeric, "kernel.ClassificationAmbiguity", "no positive real small branch");
    std::rotate(b.small.begin(), b.small.begin() + static_cast<long>(best), b.small.begin() + static_cast<long>(best) + 1);
    b.small[0] = Complex(b.small[0].real(), 0.0);
    return b;
}

inline BranchSet branches_at(const StepSet& s, double z) { return branches_at(s, z, structural_constants(s)); }

struct PuiseuxRow {
    double z = 0;
    double u1 = 0;
    double ratio = 0;      ///< (tau - u_1(z)) / sqrt(1 - z/rho)
    double deviation = 0;  ///< |ratio - beta|
};

struct PuiseuxReport {
    double beta = 0;
    std::vector<PuiseuxRow> rows;
    double max_deviation = 0;
    bool decreasing = false;
    bool success = false;
};

/// Checks u_1(z) = tau - beta sqrt(1 - z/rho) + O(1 - z/rho) on an ascending
/// grid inside (0.8 rho, rho).
inline PuiseuxReport verify_puiseux(const StepSet& s, std::vector<double> grid) {
    const auto profile = structural_constants(s);
    if (grid.empty()) fail(ErrorCategory::validation, "kernel.GridOutOfRange", "empty grid");
    std::sort(grid.begin(), grid.end());
    for (double z : grid)
        if (!(z > 0.8 * profile.rho && z < profile.rho))
            fail(ErrorCategory::validation, "kernel.GridOutOfRange",
                 "grid point " + std::to_string(z) + " outside (0.8 rho, rho)");
    PuiseuxReport rep;
    rep.beta = profile.beta_puiseux;
    for (double z : grid) {
        const auto b = branches_at(s, z, profile);
        PuiseuxRow row;
        row.z = z;
        row.u1 = b.small[0].real();
        row.ratio = (profile.tau - row.u1) / std::sqrt(1 - z / profile.rho);
        row.deviation = std::fabs(row.ratio - rep.beta);
        rep.max_deviation = std::max(rep.max_deviation, row.deviation);
        rep.rows.push_back(row);
    }
    rep.decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].deviation < rep.rows[i - 1].deviation)) rep.decreasing = false;
    rep.success = rep.decreasing && rep.rows.back().deviation < 0.05 * rep.beta;
    return rep;
}

namespace detail {

using CMatrix = std::vector<std::vector<Complex>>;

/// In-place LU with partial pivoting; returns the determinant.
inline Complex lu_decompose(CMatrix& a, std::vector<std::size_t>& perm) {
    const std::size_t n = a.size();
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Complex det = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        if (a[piv][k] == Complex(0)) return 0;
        if (piv != k) {
            std::swap(a[piv], a[k]);
            std::swap(perm[piv], perm[k]);
            det = -det;
        }
        det *= a[k][k];
        for (std::size_t i = k + 1; i < n; ++i) {
            a[i][k] /= a[k][k];
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= a[i][k] * a[k][j];
        }
    }
    return det;
}

inline std::vector<Complex> lu_solve(const CMatrix& lu, const std::vector<std::size_t>& perm,
                                     const std::vector<Complex>& b) {
    const std::size_t n = lu.size();
    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = b[perm[i]];
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu[i][j] * x[j];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu[i][j] * x[j];
        x[i] /= lu[i][i];
    }
    return x;
}

inline Complex determinant(CMatrix a) {
    std::vector<std::size_t> perm;
    return a.empty() ? Complex(1) : lu_decompose(a, perm);
}

inline double norm1(const CMatrix& a) {
    double best = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double col = 0;
        for (const auto& row : a) col += std::abs(row[j]);
        best = std::max(best, col);
    }
    return best;
}

/// u^c r_i(u) = sum_{j=i+1}^{c} s_{-j} u^{c+i-j}.
inline Complex boundary_term(const StepSet& s, int i, Complex u) {
    Complex sum = 0;
    for (int j = i + 1; j <= s.c(); ++j) sum += to_double(s.weight(-j)) * std::pow(u, s.c() + i - j);
    return sum;
}

inline CMatrix meander_matrix(const StepSet& s, double z, const std::vector<Complex>& nodes) {
    const auto c = static_cast<std::size_t>(s.c());
    CMatrix m(nodes.size(), std::vector<Complex>(c));
    for (std::size_t l = 0; l < nodes.size(); ++l)
        for (std::size_t i = 0; i < c; ++i) m[l][i] = z * boundary_term(s, static_cast<int>(i), nodes[l]);
    return m;
}

inline Complex vandermonde(const std::vector<Complex>& x) {
    Complex v = 1;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) v *= x[j] - x[i];
    return v;
}

}  // namespace detail

/// G_0(z), ..., G_{c-1}(z): generating functions of meanders ending at
/// altitude k, from the linear system sum_i z u_l^c r_i(u_l) G_i = u_l^c
/// over the small branches u_l.
struct CatalyticSolution {
    double z = 0;
    std::vector<double> g_values;
    std::vector<std::pair<double, double>> f_at;  ///< (u, F(z,1,u))
    double det_abs = 0;
    double condition = 0;
    double max_imag = 0;          ///< largest |Im G_k| (should be round-off)
    double cramer_deviation = 0;  ///< max relative gap LU vs Cramer vs Laplace
};

constexpr double kIllConditioned = 1e12;
constexpr double kCramerAgreement = 1e-8;

inline CatalyticSolution solve_meander_gf(const StepSet& s, double z, const std::vector<double>& u_eval = {},
                                          std::optional<KernelProfile> profile = std::nullopt) {
    if (!profile) profile = structural_constants(s);
    const auto branches = branches_at(s, z, *profile);
    const auto& u = branches.small;
    const std::size_t c = u.size();
    const auto M = detail::meander_matrix(s, z, u);
    std::vector<Complex> y(c);
    for (std::size_t l = 0; l < c; ++l) y[l] = std::pow(u[l], s.c());

    auto lu = M;
    std::vector<std::size_t> perm;
    const Complex det = detail::lu_decompose(lu, perm);
    if (det == Complex(0)) fail(ErrorCategory::numeric, "kernel.IllConditioned", "singular meander system");
    detail::CMatrix inv(c, std::vector<Complex>(c));
    for (std::size_t j = 0; j < c; ++j) {
        std::vector<Complex> e(c);
        e[j] = 1;
        const auto col = detail::lu_solve(lu, perm, e);
        for (std::size_t i = 0; i < c; ++i) inv[i][j] = col[i];
    }
    const double cond = detail::norm1(M) * detail::norm1(inv);
    if (!(cond <= kIllConditioned))
        fail(ErrorCategory::numeric, "kernel.IllConditioned", "condition estimate " + std::to_string(cond));
    const auto x = detail::lu_solve(lu, perm, y);

    CatalyticSolution sol;
    sol.z = z;
    sol.det_abs = std::abs(det);
    sol.condition = cond;
    double deviation = 0;
    for (std::size_t k = 0; k < c; ++k) {
        // Cramer: replace column k by y
        auto mk = M;
        for (std::size_t l = 0; l < c; ++l) mk[l][k] = y[l];
        const Complex cramer = detail::determinant(mk) / det;
        // Laplace expansion of the same determinant along column k
        Complex laplace = 0;
        for (std::size_t l = 0; l < c; ++l) {
            detail::CMatrix minor;
            for (std::size_t r = 0; r < c; ++r) {
                if (r == l) continue;
                std::vector<Complex> row;
                for (std::size_t q = 0; q < c; ++q)
                    if (q != k) row.push_back(M[r][q]);
                minor.push_back(std::move(row));
            }
            const double sign = ((l + k) % 2 == 0) ? 1.0 : -1.0;
            laplace += sign * y[l] * detail::determinant(std::move(minor));
        }
        laplace /= det;
        const double scale = std::max(std::abs(x[k]), std::numeric_limits<double>::min());
        deviation = std::max({deviation, std::abs(cramer - x[k]) / scale, std::abs(laplace - x[k]) / scale});
        sol.g_values.push_back(x[k].real());
        sol.max_imag = std::max(sol.max_imag, std::abs(x[k].imag()));
    }
    sol.cramer_deviation = deviation;
    if (deviation > kCramerAgreement)
        fail(ErrorCategory::numeric, "kernel.CrossCheckFailed",
             "Cramer/Laplace forms disagree with the direct solve by " + std::to_string(deviation));
    for (double ue : u_eval) {
        if (!(ue > 0)) fail(ErrorCategory::validation, "steps.NonpositiveArgument", "F(z,1,u) needs u > 0");
        const double denom = 1 - z * static_cast<double>(detail::step_poly(s, static_cast<long double>(ue), 0));
        if (std::fabs(denom) < 1e-12)
            fail(ErrorCategory::validation, "kernel.OutOfDomain", "u is a kernel root at this z");
        double num = 1;
        for (std::size_t i = 0; i < c; ++i)
            num -= z * (detail::boundary_term(s, static_cast<int>(i), Complex(ue)) / std::pow(ue, s.c())).real() *
                   sol.g_values[i];
        sol.f_at.emplace_back(ue, num / denom);
    }
    return sol;
}

/// Upper bound on sum_{m > M} [z^m] G_k(z): paths ending at k of length m
/// weigh at most S(tau)^m tau^{-k} = rho^{-m} tau^{-k}.
inline double meander_truncation_bound(const KernelProfile& profile, int k, double z, int M) {
    const double q = z / profile.rho;
    if (!(q < 1)) return std::numeric_limits<double>::infinity();
    return std::pow(profile.tau, -k) * std::pow(q, M + 1) / (1 - q);
}

struct AssumptionCheck {
    int item = 0;
    std::string name;
    double z = 0;
    double value = 0;
    double threshold = 0;
    bool passed = false;
    std::string note;
};

struct AssumptionReport {
    KernelProfile profile;
    std::vector<AssumptionCheck> checks;
    std::vector<std::string> warnings;

    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }
};

/// Numeric audit of the analytic assumptions on a grid of z in (0, rho).
/// Item 6 is a limit statement at z = rho; it is represented by the finite-z
/// derivative of the numerator polynomial at tau, evaluated at the largest
/// grid point.
inline AssumptionReport assumption_report(const StepSet& s, std::vector<double> grid) {
    AssumptionReport rep;
    rep.profile = structural_constants(s);
    const auto& p = rep.profile;
    std::sort(grid.begin(), grid.end());

    if (p.period != 1)
        rep.warnings.push_back("periodic step set (period " + std::to_string(p.period) +
                               "): several dominant singularities on |z| = rho");
    rep.checks.push_back({0, "aperiodic", 0, static_cast<double>(p.period), 1, p.period == 1,
                          p.period == 1 ? "" : "period " + std::to_string(p.period)});
    {
        const double d1 = std::fabs(static_cast<double>(detail::step_poly(s, p.tau, 1)));
        const double res = std::fabs(1 - p.rho * static_cast<double>(detail::step_poly(s, p.tau, 0)));
        rep.checks.push_back({2, "structural_radius", p.rho, std::max(d1, res), 1e-10, d1 < 1e-10 && res < 1e-10,
                              "max(|S'(tau)|, |1 - rho S(tau)|)"});
        rep.checks.push_back({2, "square_root_behaviour", p.rho, p.s2_tau, 0, p.s2_tau > 0, "S''(tau) > 0"});
    }
    for (double z : grid) {
        BranchSet b;
        try {
            b = branches_at(s, z, p);
        } catch (const Error& e) {
            rep.checks.push_back({3, "branch_separation", z, 0, kBranchGap, false, e.code()});
            continue;
        }
        double min_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b.small.size(); ++i)
            for (std::size_t j = i + 1; j < b.small.size(); ++j)
                min_dist = std::min(min_dist, std::abs(b.small[i] - b.small[j]));
        rep.checks.push_back({1, "small_branches_distinct", z, min_dist, kBranchGap, min_dist > kBranchGap,
                              b.small.size() == 1 ? "single small branch" : ""});
        const double gap = std::abs(b.large.front()) - std::abs(b.small.back());
        rep.checks.push_back({3, "branch_separation", z, gap, kBranchGap, gap > kBranchGap, "min |v_j| - max |u_i|"});
        double min_q = std::numeric_limits<double>::infinity();
        for (const auto& u : b.small) min_q = std::min(min_q, std::pow(std::abs(u), s.c()));
        const double lc = z * to_double(s.weight(s.d()));
        rep.checks.push_back({4, "leading_coefficient_and_Q", z, std::min(lc, min_q), 0, lc > 0 && min_q > 0,
                              "min(lc(z), |u_i|^c)"});
        const auto M = detail::meander_matrix(s, z, b.small);
        const double proxy = std::abs(detail::determinant(M)) /
                             (std::pow(to_double(s.weight(-s.c())) * z, s.c()) * std::abs(detail::vandermonde(b.small)));
        rep.checks.push_back({5, "determinant_proxy", z, proxy, 1e-6, std::fabs(proxy - 1) < 1e-6,
                              "|det M| / (|s_-c z|^c |Vandermonde|), expected 1"});
    }
    if (!grid.empty()) {
        const double z = grid.back();
        try {
            const auto sol = solve_meander_gf(s, z, {}, p);
            // N(u) = u^c - z sum_i u^c r_i(u) G_i, differentiated at tau
            auto numerator = [&](double u) {
                double v = std::pow(u, s.c());
                for (int i = 0; i < s.c(); ++i)
                    v -= z * detail::boundary_term(s, i, Complex(u)).real() * sol.g_values[static_cast<std::size_t>(i)];
                return v;
            };
            const double h = 1e-5 * p.tau;
            const double deriv = (numerator(p.tau + h) - numerator(p.tau - h)) / (2 * h);
            rep.checks.push_back({6, "derivative_limit_proxy", z, std::fabs(deriv), 1e-8, std::fabs(deriv) > 1e-8,
                                  "finite-z proxy of a limit at z = rho"});
        } catch (const Error& e) {
            rep.checks.push_back({6, "derivative_limit_proxy", z, 0, 1e-8, false, e.code()});
        }
    }
    return rep;
}

inline nlohmann::json profile_to_json(const KernelProfile& p) {
    nlohmann::json j{{"tau", p.tau},
                     {"rho", p.rho},
                     {"beta", p.beta},
                     {"beta_puiseux", p.beta_puiseux},
                     {"area_scale", p.area_scale},
                     {"altitude_scale", p.altitude_scale},
                     {"regime", std::string(to_string(p.regime))},
                     {"period", p.period}};
    j["gamma"] = p.gamma ? nlohmann::json(to_string(*p.gamma)) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json report_to_json(const AssumptionReport& rep) {
    nlohmann::json j = profile_to_json(rep.profile);
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rep.checks) {
        nlohmann::json cj{{"item", c.item}, {"name", c.name}, {"z", c.z}, {"threshold", c.threshold},
                          {"passed", c.passed}, {"note", c.note}};
        cj["value"] = std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr);
        checks.push_back(std::move(cj));
    }
    j["checks"] = checks;
    j["warnings"] = rep.warnings;
    return j;
}

}  // namespace patharea
