#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "error.hpp"
#include "numbers.hpp"
#include "steps.hpp"

namespace patharea {

enum class PathClass { excursion, meander, bridge, walk };

inline std::string_view to_string(PathClass cls) {
    switch (cls) {
        case PathClass::excursion: return "excursion";
        case PathClass::meander: return "meander";
        case PathClass::bridge: return "bridge";
        case PathClass::walk: return "walk";
    }
    return "?";
}

inline PathClass parse_path_class(std::string_view name) {
    if (name == "excursion") return PathClass::excursion;
    if (name == "meander") return PathClass::meander;
    if (name == "bridge") return PathClass::bridge;
    if (name == "walk") return PathClass::walk;
    fail(ErrorCategory::validation, "enumerate.UnknownClass", "unknown path class '" + std::string(name) + "'");
}

/// Paths of this class never go below the axis.
constexpr bool stays_nonnegative(PathClass cls) {
    return cls == PathClass::excursion || cls == PathClass::meander;
}

/// Paths of this class end on the axis.
constexpr bool ends_on_axis(PathClass cls) {
    return cls == PathClass::excursion || cls == PathClass::bridge;
}

/// Byte cap for the enumeration tables. Exceeding it raises
/// `*.OutOfMemoryBudget` before the allocation happens; the estimate only
/// depends on the number of live table entries, so the failure is
/// reproducible across machines.
struct MemoryBudget {
    std::size_t max_bytes = std::size_t{2} << 30;
};

namespace detail {

constexpr std::size_t kMapEntryBytes = 96;
constexpr std::size_t kDenseEntryBytes = 32;

inline void charge(const MemoryBudget& budget, std::size_t entries, std::size_t bytes_per_entry,
                   std::string_view module) {
    if (entries > budget.max_bytes / bytes_per_entry)
        fail(ErrorCategory::resource, std::string(module) + ".OutOfMemoryBudget",
             "table needs about " + std::to_string(entries * bytes_per_entry) + " bytes, budget is " +
                 std::to_string(budget.max_bytes));
}

template <class Num>
Num convert_weight(const Rational& w) {
    if constexpr (std::is_same_v<Num, Integer>)
        return w.get_num();
    else
        return w;
}

template <class Num>
std::vector<std::pair<int, Num>> step_list(const StepSet& s) {
    std::vector<std::pair<int, Num>> out;
    for (const auto& [k, w] : s.weights()) out.emplace_back(k, convert_weight<Num>(w));
    return out;
}

/// Altitude window [lo, hi] reachable after `steps` steps that can still
/// satisfy the class's endpoint constraint within `horizon` total steps.
struct AltitudeWindow {
    long lo;
    long hi;
};

inline AltitudeWindow altitude_window(const StepSet& s, PathClass cls, int steps, int horizon) {
    long lo = stays_nonnegative(cls) ? 0L : -static_cast<long>(s.c()) * steps;
    long hi = static_cast<long>(s.d()) * steps;
    if (ends_on_axis(cls)) {
        const long left = horizon - steps;
        hi = std::min(hi, static_cast<long>(s.c()) * left);
        lo = std::max(lo, -static_cast<long>(s.d()) * left);
    }
    return {lo, hi};
}

inline bool accepts_endpoint(PathClass cls, long h) { return !ends_on_axis(cls) || h == 0; }

}  // namespace detail

/// Exact joint table (area, final altitude) -> total weight of length-m
/// paths of one class. Area is the sum of heights w_0 + ... + w_m (signed
/// for bridges and walks).
struct AreaDistribution {
    int m = 0;
    PathClass cls = PathClass::excursion;
    std::map<std::pair<std::int64_t, std::int64_t>, Rational> table;

    Rational total() const {
        Rational t(0);
        for (const auto& [key, w] : table) t += w;
        return t;
    }
};

/// Bridges keyed by (positive area, negative area), both nonnegative.
struct SignedAreaDistribution {
    int m = 0;
    std::map<std::pair<std::int64_t, std::int64_t>, Rational> table;

    Rational total() const {
        Rational t(0);
        for (const auto& [key, w] : table) t += w;
        return t;
    }
};

namespace detail {

template <class Num>
AreaDistribution exact_distribution_impl(const StepSet& s, PathClass cls, int m, const MemoryBudget& budget) {
    const auto steps = step_list<Num>(s);
    // layer[h - window.lo] : area -> weight
    using Layer = std::vector<std::map<std::int64_t, Num>>;
    AltitudeWindow win = altitude_window(s, cls, 0, m);
    Layer layer(static_cast<std::size_t>(win.hi - win.lo + 1));
    layer[static_cast<std::size_t>(-win.lo)][0] = Num(1);
    for (int i = 1; i <= m; ++i) {
        const AltitudeWindow next = altitude_window(s, cls, i, m);
        Layer out(static_cast<std::size_t>(std::max(0L, next.hi - next.lo + 1)));
        std::size_t entries = 0;
        for (long h = win.lo; h <= win.hi; ++h) {
            const auto& cell = layer[static_cast<std::size_t>(h - win.lo)];
            if (cell.empty()) continue;
            for (const auto& [step, w] : steps) {
                const long h2 = h + step;
                if (h2 < next.lo || h2 > next.hi) continue;
                auto& target = out[static_cast<std::size_t>(h2 - next.lo)];
                for (const auto& [area, weight] : cell) target[area + h2] += w * weight;
            }
        }
        for (const auto& cell : out) entries += cell.size();
        charge(budget, entries, kMapEntryBytes, "enumerate");
        layer = std::move(out);
        win = next;
    }
    AreaDistribution dist;
    dist.m = m;
    dist.cls = cls;
    for (long h = win.lo; h <= win.hi; ++h) {
        if (!accepts_endpoint(cls, h)) continue;
        for (const auto& [area, weight] : layer[static_cast<std::size_t>(h - win.lo)])
            if (weight != 0) dist.table[{area, h}] = to_rational(weight);
    }
    return dist;
}

}  // namespace detail

/// Full (area, altitude) distribution of length-m paths of class `cls`.
inline AreaDistribution exact_distribution(const StepSet& s, PathClass cls, int m, const MemoryBudget& budget = {}) {
    if (m < 0) fail(ErrorCategory::validation, "enumerate.BadLength", "length must be nonnegative");
    return s.integer_weights() ? detail::exact_distribution_impl<Integer>(s, cls, m, budget)
                               : detail::exact_distribution_impl<Rational>(s, cls, m, budget);
}

/// Raw joint moment sums sum_w wt(w) a(w)^n h(w)^t for every length
/// 0..m_max, n <= n_max, t <= t_max.
class MomentTable {
public:
    MomentTable() = default;
    MomentTable(PathClass cls, int m_max, int n_max, int t_max)
        : cls_(cls), m_max_(m_max), n_max_(n_max), t_max_(t_max),
          totals_(static_cast<std::size_t>(m_max) + 1),
          sums_((static_cast<std::size_t>(m_max) + 1) * (n_max + 1) * (t_max + 1)) {}

    PathClass path_class() const noexcept { return cls_; }
    int m_max() const noexcept { return m_max_; }
    int n_max() const noexcept { return n_max_; }
    int t_max() const noexcept { return t_max_; }

    const Rational& total(int m) const { return totals_.at(static_cast<std::size_t>(m)); }
    Rational& total(int m) { return totals_.at(static_cast<std::size_t>(m)); }

    const Rational& raw(int m, int n, int t) const { return sums_.at(index(m, n, t)); }
    Rational& raw(int m, int n, int t) { return sums_.at(index(m, n, t)); }

    /// E[a^n h^t] over length-m paths; requires a nonzero total.
    Rational expectation(int m, int n, int t) const {
        if (total(m) == 0)
            fail(ErrorCategory::validation, "enumerate.EmptyEnsemble",
                 "no " + std::string(to_string(cls_)) + " of length " + std::to_string(m));
        return raw(m, n, t) / total(m);
    }

private:
    std::size_t index(int m, int n, int t) const {
        if (m < 0 || m > m_max_ || n < 0 || n > n_max_ || t < 0 || t > t_max_)
            fail(ErrorCategory::validation, "enumerate.OrderOutOfRange", "moment index out of range");
        return (static_cast<std::size_t>(m) * (n_max_ + 1) + n) * (t_max_ + 1) + t;
    }

    PathClass cls_ = PathClass::excursion;
    int m_max_ = 0, n_max_ = 0, t_max_ = 0;
    std::vector<Rational> totals_;
    std::vector<Rational> sums_;
};

namespace detail {

template <class Num>
MomentTable moment_dp_impl(const StepSet& s, PathClass cls, int m_max, int n_max, int t_max,
                           const MemoryBudget& budget) {
    const auto steps = step_list<Num>(s);
    const auto binom = binomial_rows(n_max);
    MomentTable table(cls, m_max, n_max, t_max);
    const std::size_t width = static_cast<std::size_t>(n_max) + 1;

    AltitudeWindow win = altitude_window(s, cls, 0, m_max);
    std::vector<Num> layer(static_cast<std::size_t>(win.hi - win.lo + 1) * width);
    layer[static_cast<std::size_t>(-win.lo) * width] = 1;

    auto harvest = [&](int m) {
        for (long h = win.lo; h <= win.hi; ++h) {
            if (!accepts_endpoint(cls, h)) continue;
            const Num* cell = &layer[static_cast<std::size_t>(h - win.lo) * width];
            if (cell[0] == 0) continue;
            Integer hp(1);
            for (int t = 0; t <= t_max; ++t) {
                for (int n = 0; n <= n_max; ++n) table.raw(m, n, t) += to_rational(Num(cell[n] * hp));
                hp *= h;
            }
            table.total(m) += to_rational(cell[0]);
        }
    };
    harvest(0);

    std::vector<Integer> hpow(width);
    Num acc;
    for (int i = 1; i <= m_max; ++i) {
        const AltitudeWindow next = altitude_window(s, cls, i, m_max);
        const std::size_t rows = static_cast<std::size_t>(std::max(0L, next.hi - next.lo + 1));
        charge(budget, 2 * rows * width, kDenseEntryBytes, "enumerate");
        std::vector<Num> out(rows * width);
        for (long h = win.lo; h <= win.hi; ++h) {
            const Num* cell = &layer[static_cast<std::size_t>(h - win.lo) * width];
            if (cell[0] == 0) continue;
            for (const auto& [step, w] : steps) {
                const long h2 = h + step;
                if (h2 < next.lo || h2 > next.hi) continue;
                hpow[0] = 1;
                for (std::size_t e = 1; e < width; ++e) hpow[e] = hpow[e - 1] * h2;
                Num* target = &out[static_cast<std::size_t>(h2 - next.lo) * width];
                // (a + h2)^j = sum_r C(j,r) a^r h2^(j-r)
                for (int j = 0; j <= n_max; ++j) {
                    acc = 0;
                    for (int r = 0; r <= j; ++r) {
                        if (cell[r] == 0) continue;
                        acc += cell[r] * (hpow[j - r] * binom[j][r]);
                    }
                    target[j] += w * acc;
                }
            }
        }
        layer = std::move(out);
        win = next;
        harvest(i);
    }
    return table;
}

}  // namespace detail

/// Moment-accumulator DP: O(m_max^2 (c+d) n_max^2) big-number operations.
inline MomentTable moment_dp(const StepSet& s, PathClass cls, int m_max, int n_max, int t_max,
                             const MemoryBudget& budget = {}) {
    if (m_max < 0 || n_max < 0 || t_max < 0 || n_max > 60)
        fail(ErrorCategory::validation, "enumerate.BadOrder", "m_max, t_max >= 0 and 0 <= n_max <= 60 required");
    return s.integer_weights() ? detail::moment_dp_impl<Integer>(s, cls, m_max, n_max, t_max, budget)
                               : detail::moment_dp_impl<Rational>(s, cls, m_max, n_max, t_max, budget);
}

/// Joint raw moments of (A+, A-, w_m) for unconstrained walks, A+ = sum of
/// positive parts of the heights and A- = sum of negative parts.
class SignedMomentTable {
public:
    SignedMomentTable() = default;
    SignedMomentTable(int m_max, int k_max, int t_max)
        : m_max_(m_max), k_max_(k_max), t_max_(t_max), totals_(static_cast<std::size_t>(m_max) + 1) {
        for (int k = 0; k <= k_max; ++k)
            for (int l = 0; k + l <= k_max; ++l) pairs_.emplace_back(k, l);
        sums_.resize((static_cast<std::size_t>(m_max) + 1) * pairs_.size() * (t_max + 1));
    }

    int m_max() const noexcept { return m_max_; }
    int k_max() const noexcept { return k_max_; }
    int t_max() const noexcept { return t_max_; }
    const std::vector<std::pair<int, int>>& pairs() const noexcept { return pairs_; }

    std::size_t pair_index(int k, int l) const {
        if (k < 0 || l < 0 || k + l > k_max_)
            fail(ErrorCategory::validation, "enumerate.OrderOutOfRange", "signed moment order out of range");
        // pairs_ is ordered by k then l; rows for k' < k hold (k_max - k' + 1) entries each.
        std::size_t idx = 0;
        for (int kk = 0; kk < k; ++kk) idx += static_cast<std::size_t>(k_max_ - kk + 1);
        return idx + static_cast<std::size_t>(l);
    }

    const Rational& total(int m) const { return totals_.at(static_cast<std::size_t>(m)); }
    Rational& total(int m) { return totals_.at(static_cast<std::size_t>(m)); }
    const Rational& raw(int m, int k, int l, int t) const { return sums_.at(index(m, k, l, t)); }
    Rational& raw(int m, int k, int l, int t) { return sums_.at(index(m, k, l, t)); }
    Rational expectation(int m, int k, int l, int t) const { return raw(m, k, l, t) / total(m); }

private:
    std::size_t index(int m, int k, int l, int t) const {
        if (m < 0 || m > m_max_ || t < 0 || t > t_max_)
            fail(ErrorCategory::validation, "enumerate.OrderOutOfRange", "signed moment index out of range");
        return (static_cast<std::size_t>(m) * pairs_.size() + pair_index(k, l)) * (t_max_ + 1) + t;
    }

    int m_max_ = 0, k_max_ = 0, t_max_ = 0;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<Rational> totals_;
    std::vector<Rational> sums_;
};

namespace detail {

template <class Num>
SignedMomentTable signed_moment_dp_impl(const StepSet& s, int m_max, int k_max, int t_max,
                                        const MemoryBudget& budget) {
    const auto steps = step_list<Num>(s);
    const auto binom = binomial_rows(k_max);
    SignedMomentTable table(m_max, k_max, t_max);
    const auto& pairs = table.pairs();
    const std::size_t width = pairs.size();

    AltitudeWindow win = altitude_window(s, PathClass::walk, 0, m_max);
    std::vector<Num> layer(static_cast<std::size_t>(win.hi - win.lo + 1) * width);
    layer[static_cast<std::size_t>(-win.lo) * width] = 1;

    auto harvest = [&](int m) {
        for (long h = win.lo; h <= win.hi; ++h) {
            const Num* cell = &layer[static_cast<std::size_t>(h - win.lo) * width];
            if (cell[0] == 0) continue;
            Integer hp(1);
            for (int t = 0; t <= t_max; ++t) {
                for (std::size_t p = 0; p < width; ++p)
                    table.raw(m, pairs[p].first, pairs[p].second, t) += to_rational(Num(cell[p] * hp));
                hp *= h;
            }
            table.total(m) += to_rational(cell[0]);
        }
    };
    harvest(0);

    std::vector<Integer> partpow(static_cast<std::size_t>(k_max) + 1);
    Num acc;
    for (int i = 1; i <= m_max; ++i) {
        const AltitudeWindow next = altitude_window(s, PathClass::walk, i, m_max);
        const std::size_t rows = static_cast<std::size_t>(next.hi - next.lo + 1);
        charge(budget, 2 * rows * width, kDenseEntryBytes, "enumerate");
        std::vector<Num> out(rows * width);
        for (long h = win.lo; h <= win.hi; ++h) {
            const Num* cell = &layer[static_cast<std::size_t>(h - win.lo) * width];
            if (cell[0] == 0) continue;
            for (const auto& [step, w] : steps) {
                const long h2 = h + step;
                Num* target = &out[static_cast<std::size_t>(h2 - next.lo) * width];
                // Only one of the two parts is nonzero, so the double binomial
                // expansion collapses to a single sum over the active coordinate.
                const bool positive = h2 >= 0;
                const long part = positive ? h2 : -h2;
                partpow[0] = 1;
                for (int e = 1; e <= k_max; ++e) partpow[e] = partpow[e - 1] * part;
                for (std::size_t p = 0; p < width; ++p) {
                    const auto [k, l] = pairs[p];
                    acc = 0;
                    if (positive) {
                        for (int a = 0; a <= k; ++a) {
                            const Num& src = cell[table.pair_index(a, l)];
                            if (src == 0) continue;
                            acc += src * (partpow[k - a] * binom[k][a]);
                        }
                    } else {
                        for (int b = 0; b <= l; ++b) {
                            const Num& src = cell[table.pair_index(k, b)];
                            if (src == 0) continue;
                            acc += src * (partpow[l - b] * binom[l][b]);
                        }
                    }
                    target[p] += w * acc;
                }
            }
        }
        layer = std::move(out);
        win = next;
        harvest(i);
    }
    return table;
}

template <class Num>
SignedAreaDistribution bridge_distribution_impl(const StepSet& s, int m, const MemoryBudget& budget) {
    const auto steps = step_list<Num>(s);
    using Key = std::pair<std::int64_t, std::int64_t>;
    using Layer = std::vector<std::map<Key, Num>>;
    AltitudeWindow win = altitude_window(s, PathClass::bridge, 0, m);
    Layer layer(static_cast<std::size_t>(win.hi - win.lo + 1));
    layer[static_cast<std::size_t>(-win.lo)][{0, 0}] = Num(1);
    for (int i = 1; i <= m; ++i) {
        const AltitudeWindow next = altitude_window(s, PathClass::bridge, i, m);
        Layer out(static_cast<std::size_t>(std::max(0L, next.hi - next.lo + 1)));
        for (long h = win.lo; h <= win.hi; ++h) {
            const auto& cell = layer[static_cast<std::size_t>(h - win.lo)];
            for (const auto& [step, w] : steps) {
                const long h2 = h + step;
                if (h2 < next.lo || h2 > next.hi) continue;
                auto& target = out[static_cast<std::size_t>(h2 - next.lo)];
                const std::int64_t plus = h2 > 0 ? h2 : 0;
                const std::int64_t minus = h2 < 0 ? -h2 : 0;
                for (const auto& [key, weight] : cell) target[{key.first + plus, key.second + minus}] += w * weight;
            }
        }
        std::size_t entries = 0;
        for (const auto& cell : out) entries += cell.size();
        charge(budget, entries, kMapEntryBytes, "enumerate");
        layer = std::move(out);
        win = next;
    }
    SignedAreaDistribution dist;
    dist.m = m;
    if (win.lo <= 0 && 0 <= win.hi)
        for (const auto& [key, weight] : layer[static_cast<std::size_t>(-win.lo)])
            if (weight != 0) dist.table[key] = to_rational(weight);
    return dist;
}

}  // namespace detail

inline SignedMomentTable signed_moment_dp(const StepSet& s, int m_max, int k_max, int t_max,
                                          const MemoryBudget& budget = {}) {
    if (m_max < 0 || k_max < 0 || t_max < 0 || k_max > 60)
        fail(ErrorCategory::validation, "enumerate.BadOrder", "m_max, t_max >= 0 and 0 <= k_max <= 60 required");
    return s.integer_weights() ? detail::signed_moment_dp_impl<Integer>(s, m_max, k_max, t_max, budget)
                               : detail::signed_moment_dp_impl<Rational>(s, m_max, k_max, t_max, budget);
}

/// Bridges of length m (paths ending at 0) by (A+, A-).
inline SignedAreaDistribution bridge_distribution(const StepSet& s, int m, const MemoryBudget& budget = {}) {
    if (m < 0) fail(ErrorCategory::validation, "enumerate.BadLength", "length must be nonnegative");
    return s.integer_weights() ? detail::bridge_distribution_impl<Integer>(s, m, budget)
                               : detail::bridge_distribution_impl<Rational>(s, m, budget);
}

/// counts[m][h]: total weight of length-m paths of class `cls` ending at
/// altitude h, for 0 <= m <= m_max and 0 <= h <= m*d (meanders/excursions
/// only, so altitudes are nonnegative).
inline std::vector<std::vector<Rational>> endpoint_counts(const StepSet& s, PathClass cls, int m_max) {
    if (!stays_nonnegative(cls))
        fail(ErrorCategory::validation, "enumerate.BadClass", "endpoint counts need a nonnegative class");
    if (m_max < 0) fail(ErrorCategory::validation, "enumerate.BadLength", "length must be nonnegative");
    std::vector<std::vector<Rational>> counts(static_cast<std::size_t>(m_max) + 1);
    std::vector<Rational> layer{Rational(1)};
    counts[0] = layer;
    for (int i = 1; i <= m_max; ++i) {
        std::vector<Rational> next(static_cast<std::size_t>(i) * s.d() + 1);
        for (std::size_t h = 0; h < layer.size(); ++h) {
            if (layer[h] == 0) continue;
            for (const auto& [step, w] : s.weights()) {
                const long h2 = static_cast<long>(h) + step;
                if (h2 >= 0) next[static_cast<std::size_t>(h2)] += w * layer[h];
            }
        }
        layer = std::move(next);
        counts[i] = layer;
    }
    if (cls == PathClass::excursion)
        for (auto& row : counts) row.resize(1);
    return counts;
}

/// Raw moment sums computed from a full distribution; the independent route
/// that `moment_dp` is checked against.
inline Rational distribution_raw_moment(const AreaDistribution& dist, int n, int t) {
    Rational sum(0);
    for (const auto& [key, w] : dist.table) {
        Integer an(1), ht(1);
        for (int i = 0; i < n; ++i) an *= static_cast<long>(key.first);
        for (int i = 0; i < t; ++i) ht *= static_cast<long>(key.second);
        sum += w * an * ht;
    }
    return sum;
}

inline void write_distribution_csv(std::ostream& os, const AreaDistribution& dist, bool header = true) {
    if (header) os << "class,m,area,altitude,weight\n";
    for (const auto& [key, w] : dist.table)
        os << to_string(dist.cls) << ',' << dist.m << ',' << key.first << ',' << key.second << ',' << to_string(w)
           << '\n';
}

inline void write_signed_distribution_csv(std::ostream& os, const SignedAreaDistribution& dist, bool header = true) {
    if (header) os << "class,m,area_plus,area_minus,weight\n";
    for (const auto& [key, w] : dist.table)
        os << "bridge," << dist.m << ',' << key.first << ',' << key.second << ',' << to_string(w) << '\n';
}

inline void write_moments_csv(std::ostream& os, const MomentTable& table, bool header = true) {
    if (header) os << "class,m,n,t,raw_sum,total\n";
    for (int m = 0; m <= table.m_max(); ++m)
        for (int n = 0; n <= table.n_max(); ++n)
            for (int t = 0; t <= table.t_max(); ++t)
                os << to_string(table.path_class()) << ',' << m << ',' << n << ',' << t << ','
                   << to_string(table.raw(m, n, t)) << ',' << to_string(table.total(m)) << '\n';
}

inline void write_signed_moments_csv(std::ostream& os, const SignedMomentTable& table, bool header = true) {
    if (header) os << "class,m,k,l,t,raw_sum,total\n";
    for (int m = 0; m <= table.m_max(); ++m)
        for (const auto& [k, l] : table.pairs())
            for (int t = 0; t <= table.t_max(); ++t)
                os << "walk," << m << ',' << k << ',' << l << ',' << t << ',' << to_string(table.raw(m, k, l, t))
                   << ',' << to_string(table.total(m)) << '\n';
}

}  // namespace patharea
