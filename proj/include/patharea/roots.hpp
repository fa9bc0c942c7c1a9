#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "error.hpp"

namespace patharea {

using Complex = std::complex<double>;

namespace detail {

using ComplexL = std::complex<long double>;

/// p(x) and p'(x) by Horner, coefficients in increasing degree.
inline void horner(const std::vector<Complex>& a, ComplexL x, ComplexL& p, ComplexL& dp) {
    p = 0;
    dp = 0;
    for (std::size_t i = a.size(); i-- > 0;) {
        dp = dp * x + p;
        p = p * x + ComplexL(a[i]);
    }
}

/// Initial moduli from the upper convex hull of (i, log|a_i|): each hull
/// edge from i to j contributes j - i roots of modulus (|a_i|/|a_j|)^(1/(j-i)).
inline std::vector<Complex> aberth_start(const std::vector<Complex>& a) {
    const int n = static_cast<int>(a.size()) - 1;
    std::vector<int> idx;
    std::vector<double> lg;
    for (int i = 0; i <= n; ++i)
        if (std::abs(a[i]) > 0) {
            idx.push_back(i);
            lg.push_back(std::log(std::abs(a[i])));
        }
    std::vector<int> hull;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        while (hull.size() >= 2) {
            const int p = hull[hull.size() - 2], q = hull.back();
            const double cross = (idx[q] - idx[p]) * (lg[k] - lg[p]) - (lg[q] - lg[p]) * (idx[k] - idx[p]);
            if (cross >= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(static_cast<int>(k));
    }
    std::vector<Complex> z;
    z.reserve(static_cast<std::size_t>(n));
    constexpr double offset = 0.4;
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        const int i = idx[hull[h]], j = idx[hull[h + 1]];
        const int count = j - i;
        const double r = std::exp((lg[hull[h]] - lg[hull[h + 1]]) / count);
        for (int k = 0; k < count; ++k) {
            const double angle = 2 * std::numbers::pi * k / count + 2 * std::numbers::pi * h / n + offset;
            z.push_back(std::polar(r, angle));
        }
    }
    return z;
}

}  // namespace detail

/// All roots of sum a_i x^i (a_n != 0) by Aberth-Ehrlich simultaneous
/// iteration in extended precision followed by Newton polishing.
inline std::vector<Complex> polynomial_roots(std::vector<Complex> a) {
    while (!a.empty() && a.back() == Complex(0)) a.pop_back();
    if (a.size() < 2) fail(ErrorCategory::validation, "roots.Degenerate", "polynomial has no roots");
    std::vector<Complex> zero_roots;
    while (a.front() == Complex(0)) {
        a.erase(a.begin());
        zero_roots.emplace_back(0);
    }
    const std::size_t n = a.size() - 1;
    std::vector<detail::ComplexL> z;
    if (n > 0)
        for (const auto& v : detail::aberth_start(a)) z.emplace_back(v);

    constexpr int kMaxIter = 500;
    std::vector<bool> done(n, false);
    for (int iter = 0; iter < kMaxIter; ++iter) {
        bool all_done = true;
        for (std::size_t k = 0; k < n; ++k) {
            if (done[k]) continue;
            detail::ComplexL p, dp;
            detail::horner(a, z[k], p, dp);
            if (p == detail::ComplexL(0)) {
                done[k] = true;
                continue;
            }
            const detail::ComplexL ratio = p / dp;
            detail::ComplexL sum = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) sum += detail::ComplexL(1) / (z[k] - z[j]);
            const detail::ComplexL w = ratio / (detail::ComplexL(1) - ratio * sum);
            z[k] -= w;
            if (std::abs(w) <= 1e-17L * std::max(std::abs(z[k]), 1e-300L))
                done[k] = true;
            else
                all_done = false;
        }
        if (all_done) break;
    }
    for (auto& r : z)
        for (int it = 0; it < 3; ++it) {
            detail::ComplexL p, dp;
            detail::horner(a, r, p, dp);
            if (dp == detail::ComplexL(0)) break;
            r -= p / dp;
        }
    std::vector<Complex> out(zero_roots);
    for (const auto& r : z) out.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
    return out;
}

}  // namespace patharea
