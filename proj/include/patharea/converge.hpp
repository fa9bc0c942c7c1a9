#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "enumerate.hpp"
#include "error.hpp"
#include "kernel.hpp"
#include "limits.hpp"
#include "numbers.hpp"
#include "steps.hpp"

namespace patharea {

/// Runs f(0..n-1) on up to `threads` workers and returns the results in
/// index order. If several calls throw, the exception of the lowest index
/// is rethrown, so failures are as deterministic as successes.
template <class F>
auto parallel_map(std::size_t n, unsigned threads, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Growth factor for the soft trend flag.
constexpr double kTrendFactor = 1.5;

/// Acceptance tolerances for the empirical suites. The defaults are the
/// values the acceptance binary pins; the CLI can override them from a
/// key = value config file.
struct Tolerances {
    double excursion_n1 = 0.05;       ///< Dyck excursions, first area moment
    double excursion_n2 = 0.10;       ///< Dyck excursions, second area moment
    double meander_joint = 0.10;      ///< zero-drift joint (area, altitude) moments
    double negative_drift = 0.10;     ///< negative-drift meander area vs BEA
    double concentration = 0.02;      ///< E[Z_m] / (gamma m^2 / 2) vs 1
    double variance_ratio = 0.15;     ///< centered second moment / (sigma^2 m^3) vs 1/3
    double drift_independence = 0.10; ///< excursions of all three drift regimes vs BEA
    double rayleigh = 0.10;           ///< meander altitude moments vs Rayleigh
    double signed_area = 0.10;        ///< Bernoulli signed-area joint moments
};

struct RegimeInfo {
    Regime regime = Regime::zero_drift;
    Rational gamma;
    std::string meander_limit;
    std::string excursion_limit = "BEA, scale beta/(sqrt2 tau) / m^{3/2}";
};

inline RegimeInfo regime_dispatch(const StepSet& s) {
    const auto ch = characteristics(s);
    RegimeInfo info;
    info.gamma = ch.drift;
    if (ch.drift < 0) {
        info.regime = Regime::negative_drift;
        info.meander_limit = "BEA, scale beta/(sqrt2 tau) / m^{3/2}";
    } else if (ch.drift == 0) {
        info.regime = Regime::zero_drift;
        info.meander_limit = "joint (BMA, Rayleigh), scales (beta/(sqrt2 m^{3/2}), beta/(sqrt2 m^{1/2}))";
    } else {
        info.regime = Regime::positive_drift;
        info.meander_limit = "Z_m/(gamma m^2/2) -> 1; (Z_m - gamma m^2/2)/(sigma m^{3/2}) -> N(0,1/3)";
    }
    return info;
}

/// How the area of a step-set path is rescaled. `corrected` multiplies by
/// beta/(sqrt2 tau); `printed` uses beta/sqrt2. They coincide at zero drift.
enum class ScaleSource { corrected, printed };

inline std::string_view to_string(ScaleSource s) { return s == ScaleSource::corrected ? "corrected" : "printed"; }

inline ScaleSource parse_scale_source(std::string_view name) {
    if (name == "corrected") return ScaleSource::corrected;
    if (name == "printed") return ScaleSource::printed;
    fail(ErrorCategory::validation, "converge.UnknownScale", "scale source must be corrected or printed");
}

struct ConvergenceRow {
    int m = 0;
    std::vector<int> orders;  ///< (n, t) or (k, l, t)
    double rescaled = 0;
    double limit = 0;
    double error = 0;       ///< relative error, absolute when the limit is 0
    bool absolute = false;  ///< error column is absolute
    std::string quantity;   ///< "moment", "concentration", "variance_ratio", "abs_area"
};

struct ConvergenceReport {
    std::string step_set;
    std::string cls;
    Regime regime = Regime::zero_drift;
    std::vector<ConvergenceRow> rows;
    std::map<std::string, bool> trend;       ///< per order key: errors decreasing along m
    std::map<std::string, bool> soft_trend;  ///< per order key: no step grows the error by more than kTrendFactor

    /// Rows of one order key in m order.
    std::vector<const ConvergenceRow*> series(const std::string& key) const {
        std::vector<const ConvergenceRow*> out;
        for (const auto& r : rows)
            if (order_key(r) == key) out.push_back(&r);
        return out;
    }

    static std::string order_key(const ConvergenceRow& r) {
        std::string key = r.quantity;
        for (int o : r.orders) key += ":" + std::to_string(o);
        return key;
    }

    const ConvergenceRow& find(int m, const std::string& key) const {
        for (const auto& r : rows)
            if (r.m == m && order_key(r) == key) return r;
        fail(ErrorCategory::validation, "converge.MissingRow", "no row " + key + " at m = " + std::to_string(m));
    }
};

namespace detail {

/// Errors strictly decreasing along the series, or identically negligible.
inline bool decreasing(const std::vector<double>& errors) {
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const bool both_zero = errors[i] <= 1e-15 && errors[i - 1] <= 1e-15;
        if (!(errors[i] < errors[i - 1]) && !both_zero) return false;
    }
    return true;
}

/// Errors never grow by more than `factor` from one m to the next.
inline bool bounded_growth(const std::vector<double>& errors, double factor) {
    for (std::size_t i = 1; i < errors.size(); ++i)
        if (errors[i] > factor * errors[i - 1] && errors[i] > 1e-15) return false;
    return true;
}

inline void compute_trends(ConvergenceReport& rep) {
    std::map<std::string, std::vector<double>> errs;
    for (const auto& r : rep.rows) errs[ConvergenceReport::order_key(r)].push_back(r.error);
    for (const auto& [key, e] : errs) {
        rep.trend[key] = decreasing(e);
        rep.soft_trend[key] = bounded_growth(e, kTrendFactor);
    }
}

inline double rel_or_abs(double value, double limit, bool& absolute) {
    absolute = limit == 0;
    return absolute ? std::fabs(value) : std::fabs(value - limit) / std::fabs(limit);
}

}  // namespace detail

/// Rescaled finite-m moments of excursions or meanders against their
/// limiting values. `orders` are (n, t) pairs: area order n, altitude order t.
inline ConvergenceReport limit_report(const StepSet& s, PathClass cls, std::vector<int> m_list,
                                      const std::vector<std::pair<int, int>>& orders,
                                      ScaleSource scale_source = ScaleSource::corrected, unsigned threads = 1,
                                      const MemoryBudget& budget = {}) {
    if (cls != PathClass::excursion && cls != PathClass::meander)
        fail(ErrorCategory::validation, "converge.UnsupportedClass",
             "limit reports cover excursions and meanders; use the signed report for walks");
    if (m_list.empty() || orders.empty())
        fail(ErrorCategory::validation, "converge.EmptyGrid", "need at least one length and one order");
    if (!std::is_sorted(m_list.begin(), m_list.end()) || m_list.front() < 1)
        fail(ErrorCategory::validation, "converge.BadGrid", "m list must be ascending and positive");
    const auto profile = structural_constants(s);
    const auto ch = characteristics(s);
    const auto info = regime_dispatch(s);
    const bool positive_meander = cls == PathClass::meander && info.regime == Regime::positive_drift;
    int n_max = 0, t_max = 0;
    for (auto [n, t] : orders) {
        if (n < 0 || t < 0) fail(ErrorCategory::validation, "converge.UnsupportedOrder", "orders must be nonnegative");
        if (cls == PathClass::excursion && t != 0)
            fail(ErrorCategory::validation, "converge.UnsupportedOrder", "excursions end at 0; altitude order must be 0");
        if (cls == PathClass::meander && info.regime == Regime::negative_drift && t != 0)
            fail(ErrorCategory::validation, "converge.UnsupportedOrder",
                 "negative-drift meander altitudes have a discrete limit; only area orders are reported");
        if (positive_meander && !(t == 0 && (n == 1 || n == 2)))
            fail(ErrorCategory::validation, "converge.UnsupportedOrder",
                 "positive drift reports (1,0) concentration and (2,0) variance ratio only");
        n_max = std::max(n_max, n);
        t_max = std::max(t_max, t);
    }
    if (n_max > 30 || t_max > 10) fail(ErrorCategory::validation, "converge.UnsupportedOrder", "orders above (30, 10)");
    const LimitTables limits(std::max(n_max, 1), std::max(t_max, 1));
    const double kappa = scale_source == ScaleSource::corrected ? profile.area_scale : profile.beta / std::sqrt(2.0);
    const double alpha = profile.altitude_scale;

    auto per_m = [&](std::size_t idx) {
        const int m = m_list[idx];
        const auto table = moment_dp(s, cls, m, n_max, t_max, budget);
        if (table.total(m) == 0)
            fail(ErrorCategory::validation, "converge.EmptyEnsemble",
                 "no " + std::string(to_string(cls)) + " of length " + std::to_string(m) +
                     (profile.period > 1 ? " (periodic step set: use multiples of the period)" : ""));
        std::vector<ConvergenceRow> rows;
        for (auto [n, t] : orders) {
            ConvergenceRow row;
            row.m = m;
            row.orders = {n, t};
            row.quantity = "moment";
            if (positive_meander) {
                const Rational half_mean = ch.drift * m * m / 2;
                const Rational e1 = table.expectation(m, 1, 0);
                if (n == 1) {
                    row.quantity = "concentration";
                    row.rescaled = to_double(e1 / half_mean);
                    row.limit = 1;
                } else {
                    row.quantity = "variance_ratio";
                    const Rational centered = table.expectation(m, 2, 0) - 2 * half_mean * e1 + half_mean * half_mean;
                    row.rescaled = to_double(centered / (ch.variance * m * m * m));
                    row.limit = 1.0 / 3.0;
                }
            } else {
                const double e = to_double(table.expectation(m, n, t));
                row.rescaled = e * std::pow(kappa, n) * std::pow(alpha, t) / std::pow(static_cast<double>(m), 1.5 * n + 0.5 * t);
                if (cls == PathClass::excursion || info.regime == Regime::negative_drift)
                    row.limit = limits.moment(MomentKind::BEA, {n}).to_double();
                else
                    row.limit = limits.moment(MomentKind::MeanderJoint, {n, t}).to_double();
            }
            row.error = detail::rel_or_abs(row.rescaled, row.limit, row.absolute);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    ConvergenceReport rep;
    rep.step_set = s.to_compact();
    rep.cls = std::string(to_string(cls));
    rep.regime = info.regime;
    for (auto& rows : parallel_map(m_list.size(), threads, per_m))
        for (auto& r : rows) rep.rows.push_back(std::move(r));
    detail::compute_trends(rep);
    return rep;
}

/// Signed-area orders: `signed_orders` are (k, l, t) for
/// E[(A+)^k (A-)^l w_m^t], `abs_orders` are (n, t) for E[A^n w_m^t],
/// all for the simple symmetric walk.
inline ConvergenceReport signed_report(std::vector<int> m_list, const std::vector<std::array<int, 3>>& signed_orders,
                                       const std::vector<std::pair<int, int>>& abs_orders = {}, unsigned threads = 1,
                                       const MemoryBudget& budget = {}) {
    if (m_list.empty()) fail(ErrorCategory::validation, "converge.EmptyGrid", "need at least one length");
    if (!std::is_sorted(m_list.begin(), m_list.end()) || m_list.front() < 1)
        fail(ErrorCategory::validation, "converge.BadGrid", "m list must be ascending and positive");
    int k_max = 0, t_max = 0;
    for (const auto& o : signed_orders) {
        if (o[0] < 0 || o[1] < 0 || o[2] < 0)
            fail(ErrorCategory::validation, "converge.UnsupportedOrder", "orders must be nonnegative");
        k_max = std::max(k_max, o[0] + o[1]);
        t_max = std::max(t_max, o[2]);
    }
    for (auto [n, t] : abs_orders) {
        if (n < 0 || t < 0) fail(ErrorCategory::validation, "converge.UnsupportedOrder", "orders must be nonnegative");
        k_max = std::max(k_max, n);
        t_max = std::max(t_max, t);
    }
    if (k_max > 12 || t_max > 10) fail(ErrorCategory::validation, "converge.UnsupportedOrder", "orders above (12, 10)");
    const auto s = parse_step_set("-1:1,1:1");
    const LimitTables limits(std::max(k_max, 1), std::max(t_max, 1));
    auto per_m = [&](std::size_t idx) {
        const int m = m_list[idx];
        const auto table = signed_moment_dp(s, m, k_max, t_max, budget);
        const double md = static_cast<double>(m);
        std::vector<ConvergenceRow> rows;
        for (const auto& o : signed_orders) {
            ConvergenceRow row;
            row.m = m;
            row.orders = {o[0], o[1], o[2]};
            row.quantity = "signed";
            row.rescaled = to_double(table.expectation(m, o[0], o[1], o[2])) / std::pow(md, 1.5 * (o[0] + o[1]) + 0.5 * o[2]);
            row.limit = limits.moment(MomentKind::WalkSigned, {o[0], o[1], o[2]}).to_double();
            row.error = detail::rel_or_abs(row.rescaled, row.limit, row.absolute);
            rows.push_back(std::move(row));
        }
        for (auto [n, t] : abs_orders) {
            Rational raw(0);
            for (int k = 0; k <= n; ++k)
                raw += Rational(binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(k))) * table.raw(m, k, n - k, t);
            ConvergenceRow row;
            row.m = m;
            row.orders = {n, t};
            row.quantity = "abs_area";
            row.rescaled = to_double(raw / table.total(m)) / std::pow(md, 1.5 * n + 0.5 * t);
            row.limit = limits.moment(MomentKind::WalkAbs, {n, t}).to_double();
            row.error = detail::rel_or_abs(row.rescaled, row.limit, row.absolute);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    ConvergenceReport rep;
    rep.step_set = s.to_compact();
    rep.cls = "walk";
    rep.regime = Regime::zero_drift;
    for (auto& rows : parallel_map(m_list.size(), threads, per_m))
        for (auto& r : rows) rep.rows.push_back(std::move(r));
    detail::compute_trends(rep);
    return rep;
}

/// Stirling numbers relating raw and falling-factorial moments:
///   x^n = sum_k S2(n,k) (x)_k,   (x)_n = sum_k s1(n,k) x^k  (signed s1).
struct FactorialRawBridge {
    std::vector<std::vector<Integer>> stirling2;
    std::vector<std::vector<Integer>> stirling1;

    std::vector<Rational> raw_from_factorial(const std::vector<Rational>& fact) const {
        std::vector<Rational> raw(fact.size());
        for (std::size_t n = 0; n < fact.size(); ++n)
            for (std::size_t k = 0; k <= n; ++k) raw[n] += Rational(stirling2[n][k]) * fact[k];
        return raw;
    }
    std::vector<Rational> factorial_from_raw(const std::vector<Rational>& raw) const {
        std::vector<Rational> fact(raw.size());
        for (std::size_t n = 0; n < raw.size(); ++n)
            for (std::size_t k = 0; k <= n; ++k) fact[n] += Rational(stirling1[n][k]) * raw[k];
        return fact;
    }
};

inline FactorialRawBridge factorial_raw_bridge(int n_max) {
    if (n_max < 0 || n_max > 200) fail(ErrorCategory::validation, "converge.UnsupportedOrder", "n_max in [0, 200]");
    const auto N = static_cast<std::size_t>(n_max) + 1;
    FactorialRawBridge b{std::vector<std::vector<Integer>>(N, std::vector<Integer>(N)),
                         std::vector<std::vector<Integer>>(N, std::vector<Integer>(N))};
    b.stirling2[0][0] = 1;
    b.stirling1[0][0] = 1;
    for (std::size_t n = 1; n < N; ++n)
        for (std::size_t k = 1; k <= n; ++k) {
            b.stirling2[n][k] = Integer(static_cast<unsigned long>(k)) * b.stirling2[n - 1][k] + b.stirling2[n - 1][k - 1];
            b.stirling1[n][k] = b.stirling1[n - 1][k - 1] - Integer(static_cast<unsigned long>(n - 1)) * b.stirling1[n - 1][k];
        }
    return b;
}

/// E[(a)_n] straight from a distribution; the literal factorial moment.
inline Rational factorial_moment(const AreaDistribution& dist, int n) {
    Rational sum(0), total(0);
    for (const auto& [key, w] : dist.table) {
        Integer f = 1;
        for (int i = 0; i < n; ++i) f *= static_cast<long>(key.first - i);
        sum += w * f;
        total += w;
    }
    if (total == 0) fail(ErrorCategory::validation, "enumerate.EmptyEnsemble", "empty distribution");
    return sum / total;
}

/// CSV columns of a convergence report.
inline const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols{"step_set", "class", "regime", "m", "n", "t",
                                               "rescaled", "limit", "rel_error", "trend"};
    return cols;
}

/// One report row as unquoted text fields in `report_columns()` order.
/// Signed orders print n as "k:l"; non-moment quantities extend the class
/// as "class/quantity".
inline std::vector<std::string> report_fields(const ConvergenceReport& rep, const ConvergenceRow& r) {
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    std::string n, t;
    if (r.orders.size() == 3) {
        n = std::to_string(r.orders[0]) + ":" + std::to_string(r.orders[1]);
        t = std::to_string(r.orders[2]);
    } else {
        n = std::to_string(r.orders[0]);
        t = std::to_string(r.orders[1]);
    }
    std::string cls = rep.cls;
    if (r.quantity != "moment" && r.quantity != "signed") cls += "/" + r.quantity;
    return {rep.step_set, cls, std::string(to_string(rep.regime)), std::to_string(r.m), n, t,
            num(r.rescaled), num(r.limit), num(r.error),
            rep.trend.at(ConvergenceReport::order_key(r)) ? "decreasing" : "not_decreasing"};
}

inline void write_report_csv(std::ostream& os, const ConvergenceReport& rep, bool header = true) {
    if (header) {
        const auto& cols = report_columns();
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
        os << '\n';
    }
    for (const auto& r : rep.rows) {
        const auto f = report_fields(rep, r);
        os << '"' << f[0] << '"';
        for (std::size_t i = 1; i < f.size(); ++i) os << ',' << f[i];
        os << '\n';
    }
}

inline nlohmann::json report_to_json(const ConvergenceReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"m", r.m},
                        {"orders", r.orders},
                        {"quantity", r.quantity},
                        {"rescaled", r.rescaled},
                        {"limit", r.limit},
                        {"error", r.error},
                        {"absolute_error", r.absolute}});
    return {{"step_set", rep.step_set},
            {"class", rep.cls},
            {"regime", std::string(to_string(rep.regime))},
            {"rows", rows},
            {"trend", rep.trend},
            {"soft_trend", rep.soft_trend}};
}

}  // namespace patharea
