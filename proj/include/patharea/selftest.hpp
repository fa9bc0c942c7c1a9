#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "converge.hpp"
#include "enumerate.hpp"
#include "error.hpp"
#include "kernel.hpp"
#include "limits.hpp"
#include "polyomino.hpp"
#include "steps.hpp"

namespace patharea {

struct SelftestRow {
    std::string module;
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline bool distributions_agree(const StepSet& s, PathClass cls, int m_max, int n_max, int t_max) {
    const auto table = moment_dp(s, cls, m_max, n_max, t_max);
    for (int m = 0; m <= m_max; ++m) {
        const auto dist = exact_distribution(s, cls, m);
        if (dist.total() != table.total(m)) return false;
        for (int n = 0; n <= n_max; ++n)
            for (int t = 0; t <= t_max; ++t)
                if (distribution_raw_moment(dist, n, t) != table.raw(m, n, t)) return false;
    }
    return true;
}

}  // namespace detail

/// Fast invariant checks across all modules. Each check is small enough
/// that the whole matrix runs in a few seconds.
inline std::vector<SelftestRow> run_selftest() {
    using Check = std::function<bool(std::string&)>;
    const std::vector<std::tuple<std::string, std::string, Check>> checks{
        {"steps", "compact round trip", [](std::string& d) {
             const auto s = parse_step_set("1:2, -1:1/2 ,0:1");
             d = s.to_compact();
             return parse_step_set(d) == s && d == "-1:1/2,0:1,1:2";
         }},
        {"steps", "Motzkin drift and variance", [](std::string& d) {
             const auto ch = characteristics(parse_step_set("-1:1,0:1,1:1"));
             d = "drift " + to_string(ch.drift) + ", variance " + to_string(ch.variance);
             return ch.drift == 0 && ch.variance == Rational(2, 3) && ch.aperiodic;
         }},
        {"enumerate", "Dyck m=6 area table", [](std::string& d) {
             const auto dist = exact_distribution(parse_step_set("-1:1,1:1"), PathClass::excursion, 6);
             std::map<std::pair<std::int64_t, std::int64_t>, Rational> want{
                 {{3, 0}, 1}, {{5, 0}, 2}, {{7, 0}, 1}, {{9, 0}, 1}};
             d = std::to_string(dist.table.size()) + " area values";
             return dist.table == want;
         }},
        {"enumerate", "reflection symmetry of walk areas", [](std::string& d) {
             const auto dist = exact_distribution(parse_step_set("-1:1,0:1,1:1"), PathClass::walk, 9);
             for (const auto& [key, w] : dist.table) {
                 const auto it = dist.table.find({-key.first, -key.second});
                 if (it == dist.table.end() || it->second != w) return false;
             }
             d = std::to_string(dist.table.size()) + " states";
             return true;
         }},
        {"enumerate", "moment DP equals distribution moments", [](std::string& d) {
             d = "{-2,-1,1} and Motzkin, all classes, m <= 10";
             for (const char* spec : {"-2:1,-1:1,1:1", "-1:1,0:1,1:1"})
                 for (auto cls : {PathClass::excursion, PathClass::meander, PathClass::bridge, PathClass::walk})
                     if (!detail::distributions_agree(parse_step_set(spec), cls, 10, 3, 2)) return false;
             return true;
         }},
        {"enumerate", "bridge totals are central binomials", [](std::string& d) {
             const auto s = parse_step_set("-1:1,1:1");
             for (int m = 0; m <= 16; m += 2)
                 if (bridge_distribution(s, m).total() != Rational(binomial(m, m / 2))) return false;
             d = "m <= 16";
             return true;
         }},
        {"limits", "hand-evaluated table entries", [](std::string& d) {
             const LimitTables L(3, 1);
             d = "K_3 = " + to_string(L.K()(3)) + ", Q_2 = " + to_string(L.Q()(2));
             return L.K()(3) == Rational(15, 128) && L.Q()(2) == Rational(59, 32) && L.C()(2, 1) == 60 &&
                    L.D()(2) == Rational(7, 32) && L.Dpm()(1, 1) == Rational(1, 32) &&
                    L.Lpm()(1, 0, 0) == Rational(1, 2) && L.Labs()(1, 0) == 1;
         }},
        {"limits", "C_{n-1,1} = 8^n K_n", [](std::string& d) {
             const auto K = kn_sequence(12);
             const auto C = cnt_table(12, 1);
             for (int n = 1; n <= 12; ++n)
                 if (C(n - 1, 1) != Rational(pow_int(Integer(8), static_cast<unsigned long>(n))) * K(n)) return false;
             d = "n <= 12";
             return true;
         }},
        {"limits", "E[BEA] rendering", [](std::string& d) {
             const auto x = limiting_moment(MomentKind::BEA, {1});
             d = x.to_string();
             return std::fabs(x.to_double() - std::sqrt(std::acos(-1.0) / 8)) < 1e-14;
         }},
        {"kernel", "Bernoulli small branch closed form", [](std::string& d) {
             const auto s = parse_step_set("-1:1,1:1");
             double worst = 0;
             for (int i = 1; i <= 20; ++i) {
                 const double z = 0.5 * i / 21.0;
                 worst = std::max(worst, std::fabs(branches_at(s, z).small[0].real() -
                                                   (1 - std::sqrt(1 - 4 * z * z)) / (2 * z)));
             }
             d = "max error " + std::to_string(worst);
             return worst < 1e-10;
         }},
        {"kernel", "Motzkin assumption audit", [](std::string& d) {
             const auto rep = assumption_report(parse_step_set("-1:1,0:1,1:1"), {0.05, 0.15, 0.25, 0.33});
             d = std::to_string(rep.checks.size()) + " checks";
             return rep.all_passed();
         }},
        {"kernel", "meander solver matches path counts", [](std::string& d) {
             const auto s = parse_step_set("-2:1,-1:1,1:1");
             const auto counts = endpoint_counts(s, PathClass::meander, 40);
             const auto sol = solve_meander_gf(s, 0.1);
             double worst = 0;
             for (int k = 0; k < s.c(); ++k) {
                 double sum = 0;
                 for (int m = 40; m >= 0; --m)
                     sum = sum * 0.1 + (static_cast<std::size_t>(k) < counts[m].size() ? to_double(counts[m][k]) : 0.0);
                 worst = std::max(worst, std::fabs(sum - sol.g_values[static_cast<std::size_t>(k)]));
             }
             d = "max gap " + std::to_string(worst);
             return worst < 1e-8;
         }},
        {"polyomino", "column DP equals brute force", [](std::string& d) {
             const auto counts = cc_enumerate(6);
             const auto brute = cc_brute_oracle(9);
             for (int hp = 2; hp <= 6; ++hp)
                 for (int a = 0; a <= 9; ++a) {
                     const auto it = brute.find({hp, a});
                     if ((it == brute.end() ? Integer(0) : it->second) != counts.count(hp, a)) return false;
                 }
             d = "hp <= 6";
             return true;
         }},
        {"polyomino", "column DP equals functional equation", [](std::string& d) {
             const auto fe = cc_series_from_functional_equation(9);
             d = "hp <= 9";
             return fe.counts == cc_enumerate(9);
         }},
        {"polyomino", "structural constants", [](std::string& d) {
             const auto p = cc_structural_constants();
             d = "rho " + std::to_string(p.rho) + ", tau " + std::to_string(p.tau);
             return std::fabs(p.rho - (3 - 2 * std::sqrt(2.0))) < 1e-10 && std::fabs(p.tau - (1 + std::sqrt(2.0))) < 1e-10;
         }},
        {"converge", "factorial moment conversion (Dyck m=6)", [](std::string& d) {
             const auto dist = exact_distribution(parse_step_set("-1:1,1:1"), PathClass::excursion, 6);
             const auto bridge = factorial_raw_bridge(2);
             std::vector<Rational> raw;
             for (int n = 0; n <= 2; ++n) raw.push_back(distribution_raw_moment(dist, n, 0) / dist.total());
             const auto fact = bridge.factorial_from_raw(raw);
             d = "E[(X)_2] = " + to_string(fact[2]);
             return fact[2] == factorial_moment(dist, 2) && fact[2] == 32;
         }},
        {"converge", "walk altitude variance", [](std::string& d) {
             const auto rep = signed_report({10, 12}, {{0, 0, 2}});
             d = "E[w_m^2]/m = " + std::to_string(rep.rows.back().rescaled);
             return rep.rows[0].rescaled == 1 && rep.rows[1].rescaled == 1;
         }},
    };
    std::vector<SelftestRow> rows;
    for (const auto& [module, name, check] : checks) {
        SelftestRow row{module, name, false, ""};
        try {
            row.passed = check(row.detail);
        } catch (const Error& e) {
            row.detail = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace patharea
