#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "enumerate.hpp"
#include "error.hpp"
#include "kernel.hpp"
#include "numbers.hpp"

namespace patharea {

/// Largest area of a column-convex polygon of half-perimeter hp.
constexpr std::int64_t cc_max_area(int hp) {
    return static_cast<std::int64_t>(hp / 2) * static_cast<std::int64_t>((hp + 1) / 2);
}

/// Rational functions of the column-convex model as integer polynomials in
/// (z, u) over the common denominator (1-u)^{den_u} (1-zu)^{den_zu}.
struct CCRational {
    std::vector<std::vector<long>> num;  ///< num[a][j]: coefficient of z^a u^j
    int den_u = 0;
    int den_zu = 0;

    double eval(double z, double u) const {
        double n = 0;
        for (std::size_t a = 0; a < num.size(); ++a)
            for (std::size_t j = 0; j < num[a].size(); ++j)
                n += static_cast<double>(num[a][j]) * std::pow(z, static_cast<double>(a)) *
                     std::pow(u, static_cast<double>(j));
        return n / (std::pow(1 - u, den_u) * std::pow(1 - z * u, den_zu));
    }
};

struct CCKernelData {
    CCRational S;   ///< u^2 (1-z)^2 / ((1-u)^2 (1-zu)^2)
    CCRational r0;  ///< z u^2 (2z - zu - 1) / ((1-u)^2 (1-zu))
    CCRational r1;  ///< z u / (1-u)
    CCRational W;   ///< z^2 u / (1-zu)
};

/// Q(z,u) = (1-u)^2 (1-zu)^2 clears every denominator.
inline CCKernelData cc_kernel_data() {
    CCKernelData d;
    d.S = {{{0, 0, 1}, {0, 0, -2}, {0, 0, 1}}, 2, 2};
    d.r0 = {{{0, 0, 0}, {0, 0, -1}, {0, 0, 2, -1}}, 2, 1};
    d.r1 = {{{0, 0}, {0, 1}}, 1, 0};
    d.W = {{{0, 0}, {0, 0}, {0, 1}}, 0, 1};
    return d;
}

/// Column-convex polygons by (half-perimeter, area, height of the last
/// column). counts(hp, h)[area] is the number of polygons.
class CCCounts {
public:
    CCCounts() = default;
    explicit CCCounts(int hp_max) : hp_max_(hp_max), rows_(static_cast<std::size_t>(hp_max) + 1) {
        for (int hp = 0; hp <= hp_max; ++hp)
            rows_[hp].assign(static_cast<std::size_t>(std::max(hp, 1)),
                             std::vector<Integer>(static_cast<std::size_t>(cc_max_area(hp)) + 1));
    }

    int hp_max() const noexcept { return hp_max_; }

    /// Count for last-column height h (1 <= h <= hp-1); zero outside.
    Integer at(int hp, std::int64_t area, int h) const {
        if (hp < 2 || hp > hp_max_ || h < 1 || h >= hp || area < 0 || area > cc_max_area(hp)) return 0;
        return rows_[hp][h][static_cast<std::size_t>(area)];
    }
    Integer& ref(int hp, std::int64_t area, int h) { return rows_.at(hp).at(h).at(static_cast<std::size_t>(area)); }

    /// Summed over the last column height.
    Integer count(int hp, std::int64_t area) const {
        Integer sum = 0;
        for (int h = 1; h < hp; ++h) sum += at(hp, area, h);
        return sum;
    }
    Integer total(int hp) const {
        Integer sum = 0;
        for (std::int64_t a = 0; a <= cc_max_area(hp); ++a) sum += count(hp, a);
        return sum;
    }

    friend bool operator==(const CCCounts& a, const CCCounts& b) {
        return a.hp_max_ == b.hp_max_ && a.rows_ == b.rows_;
    }

private:
    int hp_max_ = 0;
    std::vector<std::vector<std::vector<Integer>>> rows_;
};

namespace detail {

/// Offsets of a new column of height h2 against an old one of height h1,
/// grouped by half-perimeter increment: result[inc] = number of offsets.
/// The new column's bottom sits at offset b in [-(h2-1), h1-1] relative to
/// the old bottom; the increment is 1 plus the overhangs above and below.
inline std::vector<int> cc_offset_increments(int h1, int h2) {
    std::vector<int> mult(static_cast<std::size_t>(h1 + h2), 0);
    for (int b = -(h2 - 1); b <= h1 - 1; ++b) {
        const int top = std::max(b + h2 - h1, 0);
        const int bottom = std::max(-b, 0);
        ++mult[static_cast<std::size_t>(1 + top + bottom)];
    }
    return mult;
}

}  // namespace detail

/// Column-by-column transfer DP over half-perimeter.
inline CCCounts cc_enumerate(int hp_max, const MemoryBudget& budget = {}) {
    if (hp_max < 0 || hp_max > 200)
        fail(ErrorCategory::validation, "polyomino.BadOrder", "hp_max must lie in [0, 200]");
    std::size_t entries = 0;
    for (int hp = 2; hp <= hp_max; ++hp) entries += static_cast<std::size_t>(hp) * (cc_max_area(hp) + 1);
    detail::charge(budget, entries, detail::kDenseEntryBytes, "polyomino");
    CCCounts table(hp_max);
    for (int h = 1; h + 1 <= hp_max; ++h) table.ref(h + 1, h, h) = 1;
    std::vector<std::vector<std::vector<int>>> incs(static_cast<std::size_t>(hp_max) + 1);
    for (int h1 = 1; h1 < hp_max; ++h1) {
        incs[h1].resize(static_cast<std::size_t>(hp_max));
        for (int h2 = 1; h2 < hp_max; ++h2) incs[h1][h2] = detail::cc_offset_increments(h1, h2);
    }
    for (int hp = 2; hp <= hp_max; ++hp)
        for (int h1 = 1; h1 < hp; ++h1) {
            const std::int64_t amax = cc_max_area(hp);
            for (std::int64_t area = h1; area <= amax; ++area) {
                const Integer& w = table.ref(hp, area, h1);
                if (w == 0) continue;
                for (int h2 = 1; h2 < hp_max && h2 - h1 < hp_max - hp; ++h2) {
                    const auto& mult = incs[h1][h2];
                    for (std::size_t inc = 1; inc < mult.size(); ++inc) {
                        if (mult[inc] == 0) continue;
                        const int hp2 = hp + static_cast<int>(inc);
                        if (hp2 > hp_max) break;
                        table.ref(hp2, area + h2, h2) += w * mult[inc];
                    }
                }
            }
        }
    return table;
}

/// Fixed polyominoes with at most area_max cells, enumerated by
/// Redelmeier's algorithm, filtered to column-convex ones and counted by
/// (half-perimeter, area). Complete for every hp with cc_max_area(hp) <= area_max.
inline std::map<std::pair<int, int>, Integer> cc_brute_oracle(int area_max) {
    if (area_max < 1 || area_max > 12)
        fail(ErrorCategory::validation, "polyomino.BadOrder", "area_max must lie in [1, 12]");
    const int n = area_max;
    const int W = 2 * n + 3, H = n + 2;
    // cell (x, y) -> index; x in [-n-1, n+1], y in [-1, n]
    auto id = [&](int x, int y) { return (y + 1) * W + (x + n + 1); };
    std::vector<char> seen(static_cast<std::size_t>(W * (H + 1)), 0), occupied(seen.size(), 0);
    std::vector<std::pair<int, int>> poly;
    std::map<std::pair<int, int>, Integer> counts;
    auto allowed = [](int x, int y) { return y > 0 || (y == 0 && x >= 0); };
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};

    auto record = [&](int adjacencies) {
        std::map<int, std::pair<int, int>> cols;  // x -> (min y, max y)
        std::map<int, int> sizes;
        for (auto [x, y] : poly) {
            auto it = cols.find(x);
            if (it == cols.end())
                cols[x] = {y, y};
            else
                it->second = {std::min(it->second.first, y), std::max(it->second.second, y)};
            ++sizes[x];
        }
        for (const auto& [x, range] : cols)
            if (range.second - range.first + 1 != sizes[x]) return;
        const int area = static_cast<int>(poly.size());
        const int perimeter = 4 * area - 2 * adjacencies;
        counts[{perimeter / 2, area}] += 1;
    };

    auto rec = [&](auto&& self, std::vector<std::pair<int, int>> untried, int adjacencies) -> void {
        while (!untried.empty()) {
            const auto cell = untried.back();
            untried.pop_back();
            int adj = 0;
            for (int k = 0; k < 4; ++k) adj += occupied[id(cell.first + dx[k], cell.second + dy[k])];
            occupied[id(cell.first, cell.second)] = 1;
            poly.push_back(cell);
            record(adjacencies + adj);
            if (static_cast<int>(poly.size()) < n) {
                std::vector<std::pair<int, int>> next = untried;
                std::vector<int> marked;
                for (int k = 0; k < 4; ++k) {
                    const int x = cell.first + dx[k], y = cell.second + dy[k];
                    if (!allowed(x, y)) continue;
                    const int i = id(x, y);
                    if (seen[i]) continue;
                    seen[i] = 1;
                    marked.push_back(i);
                    next.emplace_back(x, y);
                }
                self(self, std::move(next), adjacencies + adj);
                for (int i : marked) seen[i] = 0;
            }
            poly.pop_back();
            occupied[id(cell.first, cell.second)] = 0;
        }
    };
    seen[id(0, 0)] = 1;
    rec(rec, {{0, 0}}, 0);
    return counts;
}

/// (rho, tau) from 1 = z S(z,u), dS/du = 0, by Newton's method on
/// g1 = log(z S), g2 = (dS/du)/(2S).
inline KernelProfile cc_structural_constants() {
    long double z = 0.2L, u = 2.5L;
    auto g2 = [](long double z, long double u) { return 1 / u + 1 / (1 - u) + z / (1 - z * u); };
    auto logS = [](long double z, long double u) {
        return 2 * std::log(u) + 2 * std::log(1 - z) - 2 * std::log(std::fabs(1 - u)) - 2 * std::log(1 - z * u);
    };
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        const long double f1 = std::log(z) + logS(z, u);
        const long double f2 = g2(z, u);
        const long double j11 = 1 / z - 2 / (1 - z) + 2 * u / (1 - z * u);
        const long double j12 = 2 * f2;
        const long double j21 = 1 / ((1 - z * u) * (1 - z * u));
        const long double j22 = -1 / (u * u) + 1 / ((1 - u) * (1 - u)) + z * z / ((1 - z * u) * (1 - z * u));
        const long double det = j11 * j22 - j12 * j21;
        const long double dz = (f1 * j22 - j12 * f2) / det;
        const long double du = (j11 * f2 - j21 * f1) / det;
        z -= dz;
        u -= du;
        if (!(z > 0 && z < 1 && u > 1 && z * u < 1))
            fail(ErrorCategory::numeric, "polyomino.RootFindFailure", "Newton left the admissible region");
        if (std::fabs(dz) < 1e-18L && std::fabs(du) < 1e-18L) {
            converged = true;
            break;
        }
    }
    if (!converged) fail(ErrorCategory::numeric, "polyomino.RootFindFailure", "Newton did not converge");
    const long double S = std::exp(logS(z, u));
    const long double dlogS_du = 2 * g2(z, u);
    const long double S_uu = S * (2 * (-1 / (u * u) + 1 / ((1 - u) * (1 - u)) + z * z / ((1 - z * u) * (1 - z * u))) +
                                  dlogS_du * dlogS_du);
    const long double S_z = S * (-2 / (1 - z) + 2 * u / (1 - z * u));
    if (!(S_uu > 0)) fail(ErrorCategory::numeric, "polyomino.RootFindFailure", "S'' not positive at (rho, tau)");
    KernelProfile p;
    p.rho = static_cast<double>(z);
    p.tau = static_cast<double>(u);
    p.s_tau = static_cast<double>(S);
    p.s2_tau = static_cast<double>(S_uu);
    p.beta = static_cast<double>(std::sqrt(2 * S / S_uu));
    const long double bp = std::sqrt(2 * (S + z * S_z) / S_uu);
    p.beta_puiseux = static_cast<double>(bp);
    p.area_scale = static_cast<double>(z * S_uu * bp * bp * bp / (2 * std::sqrt(2.0L) * u));
    p.altitude_scale = static_cast<double>(bp / std::sqrt(2.0L));
    p.gamma.reset();
    // Q(1 - zS) at u = 1 is -z (1-z)^2, nonzero on 0 < |z| <= rho
    p.regime = Regime::negative_drift;
    p.period = 1;
    return p;
}

/// Raw area / last-height moments of the uniform ensemble at fixed
/// half-perimeter, indexed by m = hp. Moment accumulators replace the full
/// area axis, so large hp stays cheap.
inline MomentTable cc_area_moments(int hp_max, int n_max, int t_max = 0, const MemoryBudget& budget = {}) {
    if (hp_max < 0 || hp_max > 2000 || n_max < 0 || n_max > 60 || t_max < 0)
        fail(ErrorCategory::validation, "polyomino.BadOrder", "hp_max in [0,2000], n_max in [0,60] required");
    const auto binom = binomial_rows(n_max);
    const std::size_t width = static_cast<std::size_t>(n_max) + 1;
    detail::charge(budget, static_cast<std::size_t>(hp_max + 1) * static_cast<std::size_t>(hp_max + 1) / 2 * width,
                   detail::kDenseEntryBytes, "polyomino");
    // acc[hp][h][j] = sum over polygons with this (hp, last height) of area^j
    std::vector<std::vector<std::vector<Integer>>> acc(static_cast<std::size_t>(hp_max) + 1);
    for (int hp = 0; hp <= hp_max; ++hp)
        acc[hp].assign(static_cast<std::size_t>(std::max(hp, 1)), std::vector<Integer>(width));
    for (int h = 1; h + 1 <= hp_max; ++h) {
        Integer p = 1;
        for (std::size_t j = 0; j < width; ++j, p *= h) acc[h + 1][h][j] = p;
    }
    MomentTable table(PathClass::excursion, hp_max, n_max, t_max);
    std::vector<Integer> hpow(width), tmp(width);
    for (int hp = 2; hp <= hp_max; ++hp) {
        for (int h1 = 1; h1 < hp; ++h1) {
            const auto& cell = acc[hp][h1];
            if (cell[0] == 0) continue;
            for (int h2 = 1; h2 < hp_max && h2 - h1 < hp_max - hp; ++h2) {
                hpow[0] = 1;
                for (std::size_t e = 1; e < width; ++e) hpow[e] = hpow[e - 1] * h2;
                for (std::size_t j = 0; j < width; ++j) {
                    tmp[j] = 0;
                    for (std::size_t r = 0; r <= j; ++r) tmp[j] += cell[r] * (hpow[j - r] * binom[j][r]);
                }
                const auto mult = detail::cc_offset_increments(h1, h2);
                for (std::size_t inc = 1; inc < mult.size(); ++inc) {
                    if (mult[inc] == 0) continue;
                    const int hp2 = hp + static_cast<int>(inc);
                    if (hp2 > hp_max) break;
                    auto& target = acc[hp2][h2];
                    for (std::size_t j = 0; j < width; ++j) target[j] += tmp[j] * mult[inc];
                }
            }
        }
        for (int h = 1; h < hp; ++h) {
            const auto& cell = acc[hp][h];
            Integer hp_t = 1;
            for (int t = 0; t <= t_max; ++t, hp_t *= h)
                for (int n = 0; n <= n_max; ++n) table.raw(hp, n, t) += Rational(cell[n] * hp_t);
            table.total(hp) += Rational(cell[0]);
        }
        acc[hp].clear();
        acc[hp].shrink_to_fit();
    }
    return table;
}

namespace detail {

/// Truncated bivariate integer series sum c[a][j] z^a v^j.
struct BiSeries {
    int A = 0, J = 0;
    std::vector<std::vector<Integer>> c;

    BiSeries(int a, int j) : A(a), J(j), c(static_cast<std::size_t>(a) + 1, std::vector<Integer>(static_cast<std::size_t>(j) + 1)) {}

    static BiSeries from_poly(const std::vector<std::vector<long>>& p, int a, int j) {
        BiSeries s(a, j);
        for (std::size_t x = 0; x < p.size() && static_cast<int>(x) <= a; ++x)
            for (std::size_t y = 0; y < p[x].size() && static_cast<int>(y) <= j; ++y) s.c[x][y] = p[x][y];
        return s;
    }
    /// 1 / (1 - v)^k
    static BiSeries inv_one_minus_v(int k, int a, int j) {
        BiSeries s(a, j);
        for (int y = 0; y <= j; ++y) s.c[0][y] = binomial(static_cast<unsigned long>(y + k - 1), static_cast<unsigned long>(k - 1));
        return s;
    }
    /// 1 / (1 - z v)^k
    static BiSeries inv_one_minus_zv(int k, int a, int j) {
        BiSeries s(a, j);
        for (int y = 0; y <= std::min(a, j); ++y)
            s.c[y][y] = binomial(static_cast<unsigned long>(y + k - 1), static_cast<unsigned long>(k - 1));
        return s;
    }

    friend BiSeries operator*(const BiSeries& x, const BiSeries& y) {
        BiSeries r(x.A, x.J);
        for (int a1 = 0; a1 <= x.A; ++a1)
            for (int j1 = 0; j1 <= x.J; ++j1) {
                if (x.c[a1][j1] == 0) continue;
                for (int a2 = 0; a1 + a2 <= r.A; ++a2)
                    for (int j2 = 0; j1 + j2 <= r.J; ++j2)
                        if (y.c[a2][j2] != 0) r.c[a1 + a2][j1 + j2] += x.c[a1][j1] * y.c[a2][j2];
            }
        return r;
    }
};

inline BiSeries expand(const CCRational& f, int a, int j) {
    BiSeries s = BiSeries::from_poly(f.num, a, j);
    if (f.den_u > 0) s = s * BiSeries::inv_one_minus_v(f.den_u, a, j);
    if (f.den_zu > 0) s = s * BiSeries::inv_one_minus_zv(f.den_zu, a, j);
    return s;
}

}  // namespace detail

/// Coefficients of F(z,q,u) = sum z^hp q^area u^h from the functional equation
///   F(z,q,u) = W(z,uq) + z S(z,uq) F(z,q,uq) + r0(z,uq) F(z,q,1) + r1(z,uq) F_u(z,q,1),
/// solved order by order in z. Every term on the right carries at least one
/// more power of z than the F it contains, so one pass determines each order
/// exactly; `sweeps` reports the extra fixed-point pass that confirms it.
struct CCSeriesResult {
    CCCounts counts;
    int sweeps = 0;
};

inline CCSeriesResult cc_series_from_functional_equation(int hp_max) {
    if (hp_max < 0 || hp_max > 40)
        fail(ErrorCategory::validation, "polyomino.BadOrder", "hp_max must lie in [0, 40]");
    const int J = std::max(hp_max - 1, 0);
    const auto data = cc_kernel_data();
    // z S(z,v): shift S by one power of z
    detail::BiSeries S = detail::expand(data.S, hp_max, J);
    detail::BiSeries zS(hp_max, J);
    for (int a = 0; a < hp_max; ++a) zS.c[a + 1] = S.c[a];
    const auto r0 = detail::expand(data.r0, hp_max, J);
    const auto r1 = detail::expand(data.r1, hp_max, J);
    const auto W = detail::expand(data.W, hp_max, J);

    // F[n][area][h]
    auto amax = [](int hp) { return cc_max_area(hp); };
    using Slice = std::vector<std::vector<Integer>>;
    auto one_pass = [&](const std::vector<Slice>& prev) {
        std::vector<Slice> F(static_cast<std::size_t>(hp_max) + 1);
        for (int n = 0; n <= hp_max; ++n)
            F[n].assign(static_cast<std::size_t>(amax(n) + 2 * J) + 1, std::vector<Integer>(static_cast<std::size_t>(J) + 1));
        // Individual products may land outside the support (the (1-z)^2
        // numerator cancels them), so each order is accumulated in a padded
        // slice and trimmed once complete. Heights above J only ever feed
        // higher heights and are dropped.
        auto add = [&](int n, std::int64_t area, int h, const Integer& v) {
            if (v == 0 || h > J) return;
            F[n].at(static_cast<std::size_t>(area))[h] += v;
        };
        auto trim = [&](int n) {
            for (std::size_t area = static_cast<std::size_t>(amax(n)) + 1; area < F[n].size(); ++area)
                for (const auto& v : F[n][area])
                    if (v != 0)
                        fail(ErrorCategory::internal, "polyomino.InternalInconsistency",
                             "series term outside the area support at order " + std::to_string(n));
            F[n].resize(static_cast<std::size_t>(amax(n)) + 1);
        };
        for (int n = 0; n <= hp_max; ++n) {
            // source orders come from `prev` when sweeping, from F itself on the first pass
            const auto& src = prev.empty() ? F : prev;
            for (int j = 0; j <= J; ++j) add(n, j, j, W.c[n][j]);
            for (int a = 1; a <= n; ++a) {
                const int b = n - a;
                const Slice& Fb = src[b];
                // G0 = F(z,q,1), G1 = F_u(z,q,1) at order b, as polynomials in q
                std::vector<Integer> g0(Fb.size()), g1(Fb.size());
                for (std::size_t area = 0; area < Fb.size(); ++area)
                    for (int h = 0; h <= J; ++h) {
                        g0[area] += Fb[area][h];
                        g1[area] += Fb[area][h] * h;
                    }
                for (int j = 0; j <= J; ++j) {
                    const Integer& s = zS.c[a][j];
                    if (s != 0)
                        for (std::size_t area = 0; area < Fb.size(); ++area)
                            for (int h = 0; h + j <= J; ++h)
                                if (Fb[area][h] != 0)
                                    add(n, static_cast<std::int64_t>(area) + h + j, h + j,
                                        s * Fb[area][h]);
                    for (std::size_t area = 0; area < Fb.size(); ++area) {
                        if (r0.c[a][j] != 0 && g0[area] != 0) add(n, static_cast<std::int64_t>(area) + j, j, r0.c[a][j] * g0[area]);
                        if (r1.c[a][j] != 0 && g1[area] != 0) add(n, static_cast<std::int64_t>(area) + j, j, r1.c[a][j] * g1[area]);
                    }
                }
            }
            trim(n);
        }
        return F;
    };
    auto F = one_pass({});
    CCSeriesResult result;
    result.sweeps = 1;
    for (;;) {
        auto next = one_pass(F);
        ++result.sweeps;
        if (next == F) break;
        if (result.sweeps > hp_max + 2)
            fail(ErrorCategory::numeric, "polyomino.NoFixedPoint", "functional-equation iteration did not settle");
        F = std::move(next);
    }
    result.counts = CCCounts(hp_max);
    for (int n = 2; n <= hp_max; ++n)
        for (std::int64_t area = 0; area <= amax(n); ++area)
            for (int h = 1; h < n && h <= J; ++h)
                if (F[n][static_cast<std::size_t>(area)][h] != 0) result.counts.ref(n, area, h) = F[n][static_cast<std::size_t>(area)][h];
    for (int n = 0; n <= hp_max; ++n)
        for (std::int64_t area = 0; area <= amax(n); ++area)
            for (int h = 0; h <= J; ++h)
                if ((h == 0 || h >= n) && F[n][static_cast<std::size_t>(area)][h] != 0)
                    fail(ErrorCategory::internal, "polyomino.InternalInconsistency", "series has impossible terms");
    return result;
}

inline void write_cc_counts_csv(std::ostream& os, const CCCounts& counts) {
    os << "hp,area,count\n";
    for (int hp = 2; hp <= counts.hp_max(); ++hp)
        for (std::int64_t a = 0; a <= cc_max_area(hp); ++a) {
            const Integer c = counts.count(hp, a);
            if (c != 0) os << hp << ',' << a << ',' << to_string(c) << '\n';
        }
}

inline void write_cc_moments_csv(std::ostream& os, const MomentTable& table) {
    os << "hp,n,raw_sum,total\n";
    for (int hp = 2; hp <= table.m_max(); ++hp)
        for (int n = 0; n <= table.n_max(); ++n)
            os << hp << ',' << n << ',' << to_string(table.raw(hp, n, 0)) << ',' << to_string(table.total(hp)) << '\n';
}

}  // namespace patharea
