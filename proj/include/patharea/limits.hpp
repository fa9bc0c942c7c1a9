#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "exact_radical.hpp"
#include "numbers.hpp"

namespace patharea {

enum class RecursionKind { K, Q, C, Qnt, Dk, Dpm, Lpm, Labs };

inline std::string_view to_string(RecursionKind kind) {
    switch (kind) {
        case RecursionKind::K: return "K";
        case RecursionKind::Q: return "Q";
        case RecursionKind::C: return "C";
        case RecursionKind::Qnt: return "Qnt";
        case RecursionKind::Dk: return "Dk";
        case RecursionKind::Dpm: return "Dpm";
        case RecursionKind::Lpm: return "Lpm";
        case RecursionKind::Labs: return "Labs";
    }
    return "?";
}

/// Dense table of exact rationals with one to three indices. Negative
/// indices read as 0; indices beyond the computed extent are an error, since
/// a silent 0 there would be wrong.
class RecursionTable {
public:
    RecursionTable() = default;
    RecursionTable(RecursionKind kind, std::vector<int> extents) : kind_(kind), extents_(std::move(extents)) {
        std::size_t n = 1;
        for (int e : extents_) n *= static_cast<std::size_t>(e);
        data_.resize(n);
    }

    RecursionKind kind() const noexcept { return kind_; }
    const std::vector<int>& extents() const noexcept { return extents_; }
    std::size_t rank() const noexcept { return extents_.size(); }

    Rational at(std::initializer_list<int> idx) const {
        for (int i : idx)
            if (i < 0) return Rational(0);
        return data_[offset(idx)];
    }
    Rational& ref(std::initializer_list<int> idx) { return data_[offset(idx)]; }

    Rational operator()(int i) const { return at({i}); }
    Rational operator()(int i, int j) const { return at({i, j}); }
    Rational operator()(int i, int j, int k) const { return at({i, j, k}); }

    const std::vector<Rational>& data() const noexcept { return data_; }

private:
    std::size_t offset(std::initializer_list<int> idx) const {
        if (idx.size() != extents_.size())
            fail(ErrorCategory::internal, "limits.BadRank", "wrong number of indices for table " +
                                                              std::string(to_string(kind_)));
        std::size_t off = 0;
        auto e = extents_.begin();
        for (int i : idx) {
            if (i >= *e)
                fail(ErrorCategory::validation, "limits.OrderOutOfRange",
                     "index " + std::to_string(i) + " beyond table " + std::string(to_string(kind_)) + " extent " +
                         std::to_string(*e));
            off = off * static_cast<std::size_t>(*e) + static_cast<std::size_t>(i);
            ++e;
        }
        return off;
    }

    RecursionKind kind_ = RecursionKind::K;
    std::vector<int> extents_;
    std::vector<Rational> data_;
};

inline void check_nonnegative(int v, std::string_view what) {
    if (v < 0) fail(ErrorCategory::validation, "limits.OrderOutOfRange", std::string(what) + " must be nonnegative");
}

/// K_0 = -1/2, K_n = (3n-4)/4 K_{n-1} + sum_{l=1}^{n-1} K_l K_{n-l}.
inline RecursionTable kn_sequence(int N) {
    check_nonnegative(N, "N");
    RecursionTable K(RecursionKind::K, {N + 1});
    K.ref({0}) = Rational(-1, 2);
    for (int n = 1; n <= N; ++n) {
        Rational v = Rational(3 * n - 4, 4) * K(n - 1);
        for (int l = 1; l < n; ++l) v += K(l) * K(n - l);
        K.ref({n}) = v;
    }
    return K;
}

/// Q_0 = 1, Q_n = (3n-2)/2 Q_{n-1} + 2 sum_{l=1}^{n} K_l Q_{n-l}.
inline RecursionTable qn_sequence(int N) {
    check_nonnegative(N, "N");
    const RecursionTable K = kn_sequence(N);
    RecursionTable Q(RecursionKind::Q, {N + 1});
    Q.ref({0}) = 1;
    for (int n = 1; n <= N; ++n) {
        Rational v = Rational(3 * n - 2, 2) * Q(n - 1);
        for (int l = 1; l <= n; ++l) v += 2 * K(l) * Q(n - l);
        Q.ref({n}) = v;
    }
    return Q;
}

/// C_{n,t} = C_{n,t-1} + (t+2) C_{n-1,t+2}, C_{0,0} = 1, for n <= N, t <= T.
/// Row n is computed out to T + 2(N - n) so the requested block is exact.
inline RecursionTable cnt_table(int N, int T) {
    check_nonnegative(N, "N");
    check_nonnegative(T, "T");
    const int width = T + 2 * N + 1;
    std::vector<std::vector<Rational>> rows(static_cast<std::size_t>(N) + 1,
                                            std::vector<Rational>(static_cast<std::size_t>(width)));
    auto get = [&](int n, int t) -> Rational {
        if (n < 0 || t < 0 || t >= width) return Rational(0);
        return rows[n][t];
    };
    for (int n = 0; n <= N; ++n) {
        const int limit = T + 2 * (N - n);
        for (int t = 0; t <= limit; ++t) {
            if (n == 0 && t == 0) {
                rows[0][0] = 1;
                continue;
            }
            rows[n][t] = get(n, t - 1) + (t + 2) * get(n - 1, t + 2);
        }
    }
    RecursionTable C(RecursionKind::C, {N + 1, T + 1});
    for (int n = 0; n <= N; ++n)
        for (int t = 0; t <= T; ++t) C.ref({n, t}) = rows[n][t];
    return C;
}

/// Q_{n,t}: for t >= 1, Q_{n,t} = Q_{n,t-2} + (t+1) Q_{n-1,t+1}; for n >= 1,
/// Q_{n,0} = Q_{n-1,1} - 2 * 8^{-n} C_{n-1,1}; Q_{0,0} = Q_{0,1} = 1.
inline RecursionTable qnt_table(int N, int T) {
    check_nonnegative(N, "N");
    check_nonnegative(T, "T");
    const RecursionTable C = cnt_table(std::max(N - 1, 0), 1);
    const int width = T + N + 1;
    std::vector<std::vector<Rational>> rows(static_cast<std::size_t>(N) + 1,
                                            std::vector<Rational>(static_cast<std::size_t>(width)));
    auto get = [&](int n, int t) -> Rational {
        if (n < 0 || t < 0 || t >= width) return Rational(0);
        return rows[n][t];
    };
    for (int n = 0; n <= N; ++n) {
        const int limit = T + (N - n);
        for (int t = 0; t <= limit; ++t) {
            if (n == 0 && t <= 1)
                rows[0][t] = 1;
            else if (t == 0)
                rows[n][0] = get(n - 1, 1) - 2 * C(n - 1, 1) / Rational(pow_int(Integer(8), static_cast<unsigned long>(n)));
            else
                rows[n][t] = get(n, t - 2) + (t + 1) * get(n - 1, t + 1);
        }
    }
    RecursionTable Q(RecursionKind::Qnt, {N + 1, T + 1});
    for (int n = 0; n <= N; ++n)
        for (int t = 0; t <= T; ++t) Q.ref({n, t}) = rows[n][t];
    return Q;
}

struct DTables {
    RecursionTable D;     ///< D_k = [x^k] 1/(1 - 2 sum K_n x^n)
    RecursionTable Dpm;   ///< D±_{k,l} = [x^k y^l] 1/(1 - sum K_n (x^n + y^n))
};

/// Both D tables up to Kmax by exact series inversion.
inline DTables dk_dpm_tables(int Kmax) {
    check_nonnegative(Kmax, "Kmax");
    const RecursionTable K = kn_sequence(Kmax);
    DTables out{RecursionTable(RecursionKind::Dk, {Kmax + 1}), RecursionTable(RecursionKind::Dpm, {Kmax + 1, Kmax + 1})};
    out.D.ref({0}) = 1;
    for (int k = 1; k <= Kmax; ++k) {
        Rational v(0);
        for (int j = 1; j <= k; ++j) v += 2 * K(j) * out.D(k - j);
        out.D.ref({k}) = v;
    }
    for (int k = 0; k <= Kmax; ++k)
        for (int l = 0; l <= Kmax; ++l) {
            if (k == 0 && l == 0) {
                out.Dpm.ref({0, 0}) = 1;
                continue;
            }
            Rational v(0);
            for (int j = 1; j <= k; ++j) v += K(j) * out.Dpm(k - j, l);
            for (int j = 1; j <= l; ++j) v += K(j) * out.Dpm(k, l - j);
            out.Dpm.ref({k, l}) = v;
        }
    return out;
}

struct LTables {
    RecursionTable Lpm;   ///< L±_{k,l,t}, k,l <= Kmax (entries with k+l > Kmax included)
    RecursionTable Labs;  ///< L_{n,t}, odd t stored as 0
};

/// Signed and absolute walk-area tables, computed twice: by the direct
/// recursion and by the Q*D convolution. A disagreement throws
/// limits.InternalInconsistency.
inline LTables lpm_labs_tables(int Kmax, int Tmax) {
    check_nonnegative(Kmax, "Kmax");
    check_nonnegative(Tmax, "Tmax");
    const RecursionTable K = kn_sequence(Kmax);
    const RecursionTable Qnt = qnt_table(Kmax, Tmax);
    const DTables D = dk_dpm_tables(Kmax);

    LTables out{RecursionTable(RecursionKind::Lpm, {Kmax + 1, Kmax + 1, Tmax + 1}),
                RecursionTable(RecursionKind::Labs, {Kmax + 1, Tmax + 1})};
    for (int t = 0; t <= Tmax; ++t) {
        const int sign = (t % 2 == 0) ? 1 : -1;
        for (int k = 0; k <= Kmax; ++k)
            for (int l = 0; l <= Kmax; ++l) {
                Rational rec(0);
                if (k == 0 && l == 0) {
                    rec = (t % 2 == 0) ? 1 : 0;
                } else {
                    for (int j = 1; j <= k; ++j) rec += K(j) * out.Lpm(k - j, l, t);
                    for (int j = 1; j <= l; ++j) rec += K(j) * out.Lpm(k, l - j, t);
                    if (l == 0) rec += Qnt(k, t) / 2;
                    if (k == 0) rec += sign * Qnt(l, t) / 2;
                }
                Rational conv(0);
                for (int i = 0; i <= k; ++i) conv += Qnt(k - i, t) * D.Dpm(i, l);
                Rational conv2(0);
                for (int j = 0; j <= l; ++j) conv2 += Qnt(l - j, t) * D.Dpm(k, j);
                conv = conv / 2 + sign * conv2 / 2;
                if (rec != conv)
                    fail(ErrorCategory::internal, "limits.InternalInconsistency",
                         "L± recursion and convolution disagree at (" + std::to_string(k) + "," + std::to_string(l) +
                             "," + std::to_string(t) + ")");
                out.Lpm.ref({k, l, t}) = rec;
            }
        for (int n = 0; n <= Kmax; ++n) {
            if (t % 2 == 1) {
                out.Labs.ref({n, t}) = 0;
                continue;
            }
            Rational rec = Qnt(n, t);
            for (int j = 1; j <= n; ++j) rec += 2 * K(j) * out.Labs(n - j, t);
            Rational conv(0);
            for (int k = 0; k <= n; ++k) conv += Qnt(n - k, t) * D.D(k);
            if (rec != conv)
                fail(ErrorCategory::internal, "limits.InternalInconsistency",
                     "absolute-area recursion and convolution disagree at (" + std::to_string(n) + "," +
                         std::to_string(t) + ")");
            out.Labs.ref({n, t}) = rec;
        }
    }
    return out;
}

enum class MomentKind { BEA, BMA, MeanderJoint, WalkSigned, WalkAbs, Rayleigh };

inline std::string_view to_string(MomentKind kind) {
    switch (kind) {
        case MomentKind::BEA: return "bea";
        case MomentKind::BMA: return "bma";
        case MomentKind::MeanderJoint: return "meander";
        case MomentKind::WalkSigned: return "signed";
        case MomentKind::WalkAbs: return "abs";
        case MomentKind::Rayleigh: return "rayleigh";
    }
    return "?";
}

inline MomentKind parse_moment_kind(std::string_view name) {
    for (auto k : {MomentKind::BEA, MomentKind::BMA, MomentKind::MeanderJoint, MomentKind::WalkSigned,
                   MomentKind::WalkAbs, MomentKind::Rayleigh})
        if (to_string(k) == name) return k;
    fail(ErrorCategory::validation, "limits.UnknownKind", "unknown moment kind '" + std::string(name) + "'");
}

/// Number of order indices each kind takes.
constexpr int order_arity(MomentKind kind) {
    switch (kind) {
        case MomentKind::BEA:
        case MomentKind::BMA:
        case MomentKind::Rayleigh: return 1;
        case MomentKind::MeanderJoint:
        case MomentKind::WalkAbs: return 2;
        case MomentKind::WalkSigned: return 3;
    }
    return 0;
}

/// All recursion tables to fixed orders, plus the Gamma-normalized moments.
class LimitTables {
public:
    /// n_max bounds the area orders (n, k, l, k+l), t_max the altitude order.
    explicit LimitTables(int n_max = 30, int t_max = 10)
        : n_max_(n_max), t_max_(t_max), K_(kn_sequence(n_max)), Q_(qn_sequence(n_max)),
          C_(cnt_table(n_max, t_max)), Qnt_(qnt_table(n_max, t_max)), D_(dk_dpm_tables(n_max)),
          L_(lpm_labs_tables(std::min(n_max, 12), t_max)) {}

    int n_max() const noexcept { return n_max_; }
    int t_max() const noexcept { return t_max_; }
    int walk_order_max() const noexcept { return std::min(n_max_, 12); }

    const RecursionTable& K() const noexcept { return K_; }
    const RecursionTable& Q() const noexcept { return Q_; }
    const RecursionTable& C() const noexcept { return C_; }
    const RecursionTable& Qnt() const noexcept { return Qnt_; }
    const RecursionTable& D() const noexcept { return D_.D; }
    const RecursionTable& Dpm() const noexcept { return D_.Dpm; }
    const RecursionTable& Lpm() const noexcept { return L_.Lpm; }
    const RecursionTable& Labs() const noexcept { return L_.Labs; }

    const RecursionTable& table(RecursionKind kind) const {
        switch (kind) {
            case RecursionKind::K: return K_;
            case RecursionKind::Q: return Q_;
            case RecursionKind::C: return C_;
            case RecursionKind::Qnt: return Qnt_;
            case RecursionKind::Dk: return D_.D;
            case RecursionKind::Dpm: return D_.Dpm;
            case RecursionKind::Lpm: return L_.Lpm;
            case RecursionKind::Labs: return L_.Labs;
        }
        return K_;
    }

    /// Exact limiting moment. Orders: BEA/BMA (n), Rayleigh (t),
    /// MeanderJoint/WalkAbs (n, t), WalkSigned (k, l, t).
    ExactRadical moment(MomentKind kind, const std::vector<int>& orders) const {
        if (static_cast<int>(orders.size()) != order_arity(kind))
            fail(ErrorCategory::validation, "limits.OrderOutOfRange",
                 std::string(to_string(kind)) + " takes " + std::to_string(order_arity(kind)) + " orders");
        for (int o : orders) check_nonnegative(o, "order");
        auto need = [](bool ok) {
            if (!ok) fail(ErrorCategory::validation, "limits.OrderOutOfRange", "order beyond computed tables");
        };
        auto fact = [](int n) { return Rational(factorial(static_cast<unsigned long>(n))); };
        switch (kind) {
            case MomentKind::BEA: {
                const int n = orders[0];
                need(n <= n_max_);
                // n! K_n Gamma(-1/2) 2^{-n/2} / (K_0 Gamma(3n/2 - 1/2))
                const ExactRadical num = ExactRadical(fact(n) * K_(n) / K_(0), -n, 0) * gamma_half(-1);
                return num / gamma_half(3L * n - 1);
            }
            case MomentKind::BMA: {
                const int n = orders[0];
                need(n <= n_max_);
                return ExactRadical(fact(n) * Q_(n), -n, 0) * gamma_half(1) / gamma_half(3L * n + 1);
            }
            case MomentKind::MeanderJoint: {
                const int n = orders[0], t = orders[1];
                need(n <= n_max_ && t <= t_max_);
                return ExactRadical(fact(n) * fact(t) * Qnt_(n, t), -(n + t), 0) * gamma_half(1) /
                       gamma_half(3L * n + t + 1);
            }
            case MomentKind::WalkSigned: {
                const int k = orders[0], l = orders[1], t = orders[2];
                need(k + l <= walk_order_max() && t <= t_max_);
                return ExactRadical(fact(k) * fact(l) * fact(t) * L_.Lpm(k, l, t), -(k + l + t), 0) /
                       gamma_half(3L * (k + l) + t + 2);
            }
            case MomentKind::WalkAbs: {
                const int n = orders[0], t = orders[1];
                need(n <= walk_order_max() && t <= t_max_);
                return ExactRadical(fact(n) * fact(t) * L_.Labs(n, t), -(n + t), 0) / gamma_half(3L * n + t + 2);
            }
            case MomentKind::Rayleigh: {
                const int t = orders[0];
                return ExactRadical::pow_sqrt2(t) * gamma_half(t + 2L);
            }
        }
        return {};
    }

private:
    int n_max_;
    int t_max_;
    RecursionTable K_, Q_, C_, Qnt_;
    DTables D_;
    LTables L_;
};

/// Convenience wrapper building tables just large enough for one query.
inline ExactRadical limiting_moment(MomentKind kind, const std::vector<int>& orders) {
    int n = 0, t = 0;
    switch (order_arity(kind)) {
        case 1: (kind == MomentKind::Rayleigh ? t : n) = orders.empty() ? 0 : orders[0]; break;
        case 2: n = orders.size() > 0 ? orders[0] : 0; t = orders.size() > 1 ? orders[1] : 0; break;
        case 3:
            n = orders.size() > 1 ? orders[0] + orders[1] : 0;
            t = orders.size() > 2 ? orders[2] : 0;
            break;
    }
    for (int o : orders) check_nonnegative(o, "order");
    if (n > 60 || t > 60) fail(ErrorCategory::validation, "limits.OrderOutOfRange", "orders above 60 are not supported");
    return LimitTables(std::max(n, 1), std::max(t, 1)).moment(kind, orders);
}

/// Index column names for CSV/JSON export.
inline std::vector<std::string> index_names(RecursionKind kind) {
    switch (kind) {
        case RecursionKind::K:
        case RecursionKind::Q:
        case RecursionKind::Dk: return {"n"};
        case RecursionKind::C:
        case RecursionKind::Qnt:
        case RecursionKind::Labs: return {"n", "t"};
        case RecursionKind::Dpm: return {"k", "l"};
        case RecursionKind::Lpm: return {"k", "l", "t"};
    }
    return {};
}

namespace detail {

template <class F>
void for_each_index(const RecursionTable& table, F&& f) {
    const auto& e = table.extents();
    std::array<int, 3> idx{0, 0, 0};
    const std::size_t total = table.data().size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        for (std::size_t d = e.size(); d-- > 0;) {
            idx[d] = static_cast<int>(rest % static_cast<std::size_t>(e[d]));
            rest /= static_cast<std::size_t>(e[d]);
        }
        f(std::vector<int>(idx.begin(), idx.begin() + static_cast<long>(e.size())), table.data()[flat]);
    }
}

}  // namespace detail

inline void write_table_csv(std::ostream& os, const RecursionTable& table) {
    os << "kind";
    for (const auto& name : index_names(table.kind())) os << ',' << name;
    os << ",value,float\n";
    detail::for_each_index(table, [&](const std::vector<int>& idx, const Rational& v) {
        os << to_string(table.kind());
        for (int i : idx) os << ',' << i;
        os << ',' << to_string(v) << ',' << to_double(v) << '\n';
    });
}

inline nlohmann::json table_to_json(const RecursionTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    const auto names = index_names(table.kind());
    detail::for_each_index(table, [&](const std::vector<int>& idx, const Rational& v) {
        nlohmann::json row;
        for (std::size_t i = 0; i < idx.size(); ++i) row[names[i]] = idx[i];
        row["value"] = to_string(v);
        row["float"] = to_double(v);
        rows.push_back(std::move(row));
    });
    return {{"kind", std::string(to_string(table.kind()))}, {"extents", table.extents()}, {"rows", rows}};
}

inline nlohmann::json radical_to_json(const ExactRadical& x) {
    return {{"coeff", to_string(x.coeff())},
            {"half_pow2", x.half_pow2()},
            {"half_powpi", x.half_powpi()},
            {"exact", x.to_string()},
            {"float", x.to_double()}};
}

}  // namespace patharea
