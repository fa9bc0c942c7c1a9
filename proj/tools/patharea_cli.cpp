/// Command-line front end. Every report starts with the resolved
/// configuration (comment lines for csv/table, a "config" object for json),
/// so a run can be reproduced from its own output.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <new>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "patharea/patharea.hpp"

using namespace patharea;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Argument parsing helpers

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

int parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used == text.size() && v >= -1000000 && v <= 1000000) return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    fail(ErrorCategory::validation, "cli.BadArgument", "bad integer '" + text + "' in " + what);
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_int(item, what));
    if (out.empty()) fail(ErrorCategory::validation, "cli.BadArgument", what + " is empty");
    return out;
}

/// "1:0,2:0" -> {(1,0),(2,0)}; also accepts triples "k:l:t".
std::vector<std::vector<int>> parse_orders(const std::string& text, std::size_t arity) {
    std::vector<std::vector<int>> out;
    for (const auto& item : split(text, ',')) {
        std::vector<int> o;
        for (const auto& part : split(item, ':')) o.push_back(parse_int(part, "--orders"));
        if (o.size() != arity)
            fail(ErrorCategory::validation, "cli.BadArgument",
                 "order '" + item + "' needs " + std::to_string(arity) + " colon-separated integers");
        out.push_back(std::move(o));
    }
    if (out.empty()) fail(ErrorCategory::validation, "cli.BadArgument", "--orders is empty");
    return out;
}

/// "a:b:n" -> n evenly spaced points from a to b inclusive.
std::vector<double> parse_grid(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) fail(ErrorCategory::validation, "cli.BadArgument", "grid must be a:b:n");
    double a = 0, b = 0;
    try {
        a = std::stod(parts[0]);
        b = std::stod(parts[1]);
    } catch (const std::exception&) {
        fail(ErrorCategory::validation, "cli.BadArgument", "grid bounds must be numbers");
    }
    const int n = parse_int(parts[2], "--grid");
    if (n < 1 || n > 100000) fail(ErrorCategory::validation, "cli.BadArgument", "grid size must be in [1, 100000]");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(ErrorCategory::validation, "cli.BadArgument", "bad number '" + item + "' in " + what);
        }
    }
    return out;
}

/// "512M", "2G", "1048576" -> bytes.
std::size_t parse_bytes(const std::string& text) {
    if (text.empty()) fail(ErrorCategory::validation, "cli.BadArgument", "empty memory budget");
    std::size_t mult = 1;
    std::string digits = text;
    switch (std::toupper(static_cast<unsigned char>(text.back()))) {
        case 'K': mult = std::size_t{1} << 10; break;
        case 'M': mult = std::size_t{1} << 20; break;
        case 'G': mult = std::size_t{1} << 30; break;
        default: break;
    }
    if (mult != 1) digits.pop_back();
    const int v = parse_int(digits, "--memory-budget");
    if (v <= 0) fail(ErrorCategory::validation, "cli.BadArgument", "memory budget must be positive");
    return static_cast<std::size_t>(v) * mult;
}

// ---------------------------------------------------------------------------
// Report rendering

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

struct Report {
    std::vector<std::pair<std::string, std::string>> facts;  ///< extra header lines
    Table table;
    json payload;  ///< json output; built from the table when null
};

std::string cell_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    if (v.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
        return buf;
    }
    return v.dump();
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

json table_json(const Table& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row = json::object();
        for (std::size_t i = 0; i < t.columns.size(); ++i) row[t.columns[i]] = r[i];
        rows.push_back(std::move(row));
    }
    return {{"columns", t.columns}, {"rows", rows}};
}

void emit(std::ostream& os, const std::string& format, const json& config, const Report& rep) {
    if (format == "json") {
        json out = rep.payload.is_null() ? table_json(rep.table) : rep.payload;
        if (!rep.facts.empty() && rep.payload.is_null())
            for (const auto& [k, v] : rep.facts) out[k] = v;
        out["config"] = config;
        os << out.dump(2) << '\n';
        return;
    }
    os << "# patharea " << config["command"].get<std::string>() << '\n';
    for (const auto& [k, v] : config["options"].items()) os << "# " << k << " = " << cell_text(v) << '\n';
    for (const auto& [k, v] : rep.facts) os << "# " << k << ": " << v << '\n';
    const auto& t = rep.table;
    if (format == "csv") {
        for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i]);
        os << '\n';
        for (const auto& r : t.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(cell_text(r[i]));
            os << '\n';
        }
        return;
    }
    std::vector<std::size_t> width(t.columns.size());
    for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
    for (const auto& r : t.rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], cell_text(r[i]).size());
    auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            s += cells[i];
            if (i + 1 < cells.size()) s += std::string(width[i] - cells[i].size() + 2, ' ');
        }
        os << s << '\n';
    };
    line(t.columns);
    std::vector<std::string> rule;
    for (auto w : width) rule.emplace_back(w, '-');
    line(rule);
    for (const auto& r : t.rows) {
        std::vector<std::string> cells;
        for (const auto& v : r) cells.push_back(cell_text(v));
        line(cells);
    }
}

void warn_if_periodic(const KernelProfile& p) {
    if (p.period > 1)
        std::cerr << "warning: periodic step set (period " << p.period
                  << "); several singularities share the dominant modulus\n";
}

// ---------------------------------------------------------------------------
// Options

struct Options {
    std::string format = "table";
    std::string output;
    std::string memory_budget = "2G";
    unsigned threads = 1;
    Tolerances tol;

    std::string steps;
    std::string cls = "excursion";
    int m = 0;
    std::string m_list;
    int n = 2;
    int t = 0;
    bool signed_area = false;
    std::string kind = "bea";
    std::string table_name;
    std::string orders = "1:0";
    std::string scale = "corrected";
    std::string z_list;
    std::string grid;
    std::string u_list;
    int hp_max = 12;
    std::string hp_list = "20,40,60";
    int area_max = 12;
};

MemoryBudget budget_of(const Options& o) { return MemoryBudget{parse_bytes(o.memory_budget)}; }

// ---------------------------------------------------------------------------
// Subcommands

Report run_analyze(const Options& o) {
    const auto s = parse_step_set(o.steps);
    const auto p = structural_constants(s);
    warn_if_periodic(p);
    const auto ch = characteristics(s);
    const auto info = regime_dispatch(s);
    Report rep;
    rep.table.columns = {"quantity", "value"};
    rep.table.rows = {{"steps", s.to_compact()},
                      {"c", s.c()},
                      {"d", s.d()},
                      {"drift", to_string(ch.drift)},
                      {"variance", to_string(ch.variance)},
                      {"period", ch.period},
                      {"tau", p.tau},
                      {"rho", p.rho},
                      {"beta", p.beta},
                      {"area_scale", p.area_scale},
                      {"regime", std::string(to_string(p.regime))},
                      {"meander_limit", info.meander_limit},
                      {"excursion_limit", info.excursion_limit}};
    rep.payload = profile_to_json(p);
    rep.payload["steps"] = to_json(s);
    rep.payload["c"] = s.c();
    rep.payload["d"] = s.d();
    rep.payload["drift"] = to_string(ch.drift);
    rep.payload["variance"] = to_string(ch.variance);
    rep.payload["meander_limit"] = info.meander_limit;
    rep.payload["excursion_limit"] = info.excursion_limit;
    return rep;
}

Report run_enumerate(const Options& o) {
    const auto s = parse_step_set(o.steps);
    const auto cls = parse_path_class(o.cls);
    Report rep;
    if (o.signed_area) {
        if (cls != PathClass::bridge)
            fail(ErrorCategory::validation, "cli.BadArgument", "--signed applies to --class bridge");
        const auto dist = bridge_distribution(s, o.m, budget_of(o));
        rep.table.columns = {"class", "m", "area_plus", "area_minus", "weight"};
        for (const auto& [key, w] : dist.table) rep.table.rows.push_back({"bridge", o.m, key.first, key.second, to_string(w)});
        rep.facts.emplace_back("total", to_string(dist.total()));
        return rep;
    }
    const auto dist = exact_distribution(s, cls, o.m, budget_of(o));
    rep.table.columns = {"class", "m", "area", "altitude", "weight"};
    for (const auto& [key, w] : dist.table)
        rep.table.rows.push_back({std::string(to_string(cls)), o.m, key.first, key.second, to_string(w)});
    rep.facts.emplace_back("total", to_string(dist.total()));
    return rep;
}

Report run_moments(const Options& o) {
    const auto s = parse_step_set(o.steps);
    Report rep;
    if (o.signed_area) {
        const auto table = signed_moment_dp(s, o.m, o.n, o.t, budget_of(o));
        rep.table.columns = {"class", "m", "k", "l", "t", "raw_sum", "total", "expectation"};
        for (int m = 0; m <= table.m_max(); ++m)
            for (const auto& [k, l] : table.pairs())
                for (int t = 0; t <= table.t_max(); ++t)
                    rep.table.rows.push_back({"walk", m, k, l, t, to_string(table.raw(m, k, l, t)),
                                              to_string(table.total(m)),
                                              to_double(table.expectation(m, k, l, t))});
        return rep;
    }
    const auto cls = parse_path_class(o.cls);
    const auto table = moment_dp(s, cls, o.m, o.n, o.t, budget_of(o));
    rep.table.columns = {"class", "m", "n", "t", "raw_sum", "total", "expectation"};
    for (int m = 0; m <= table.m_max(); ++m)
        for (int n = 0; n <= table.n_max(); ++n)
            for (int t = 0; t <= table.t_max(); ++t)
                rep.table.rows.push_back({std::string(to_string(cls)), m, n, t, to_string(table.raw(m, n, t)),
                                          to_string(table.total(m)),
                                          table.total(m) == 0 ? json(nullptr) : json(to_double(table.expectation(m, n, t)))});
    return rep;
}

RecursionKind parse_table_name(const std::string& name) {
    if (name == "D") return RecursionKind::Dk;
    for (auto k : {RecursionKind::K, RecursionKind::Q, RecursionKind::C, RecursionKind::Qnt, RecursionKind::Dk,
                   RecursionKind::Dpm, RecursionKind::Lpm, RecursionKind::Labs})
        if (to_string(k) == name) return k;
    fail(ErrorCategory::validation, "limits.UnknownKind", "unknown table '" + name + "'");
}

Report run_limits(const Options& o) {
    if (o.n < 0 || o.t < 0) fail(ErrorCategory::validation, "limits.OrderOutOfRange", "orders must be nonnegative");
    Report rep;
    if (!o.table_name.empty()) {
        const auto kind = parse_table_name(o.table_name);
        const LimitTables L(std::max(o.n, 1), std::max(o.t, 1));
        const auto& table = L.table(kind);
        rep.table.columns = index_names(kind);
        rep.table.columns.insert(rep.table.columns.begin(), "kind");
        rep.table.columns.push_back("value");
        rep.table.columns.push_back("float");
        detail::for_each_index(table, [&](const std::vector<int>& idx, const Rational& v) {
            std::vector<json> row{std::string(to_string(kind))};
            for (int i : idx) row.emplace_back(i);
            row.emplace_back(to_string(v));
            row.emplace_back(to_double(v));
            rep.table.rows.push_back(std::move(row));
        });
        rep.payload = table_to_json(table);
        return rep;
    }
    const auto kind = parse_moment_kind(o.kind);
    std::vector<std::vector<int>> orders;
    switch (kind) {
        case MomentKind::BEA:
        case MomentKind::BMA:
            for (int n = 0; n <= o.n; ++n) orders.push_back({n});
            break;
        case MomentKind::Rayleigh:
            for (int t = 0; t <= std::max(o.n, o.t); ++t) orders.push_back({t});
            break;
        case MomentKind::MeanderJoint:
        case MomentKind::WalkAbs:
            for (int n = 0; n <= o.n; ++n)
                for (int t = 0; t <= o.t; ++t) orders.push_back({n, t});
            break;
        case MomentKind::WalkSigned:
            for (int k = 0; k <= o.n; ++k)
                for (int l = 0; k + l <= o.n; ++l)
                    for (int t = 0; t <= o.t; ++t) orders.push_back({k, l, t});
            break;
    }
    const LimitTables L(std::max(o.n, 1), std::max({o.t, o.n, 1}));
    rep.table.columns = {"kind", "orders", "exact", "float"};
    json rows = json::array();
    for (const auto& ord : orders) {
        const auto x = L.moment(kind, ord);
        std::string key;
        for (int v : ord) key += (key.empty() ? "" : ":") + std::to_string(v);
        rep.table.rows.push_back({std::string(to_string(kind)), key, x.to_string(), x.to_double()});
        json r = radical_to_json(x);
        r["orders"] = ord;
        rows.push_back(std::move(r));
    }
    rep.payload = {{"kind", std::string(to_string(kind))}, {"rows", rows}};
    return rep;
}

std::vector<double> default_grid(const KernelProfile& p) {
    return {0.1 * p.rho, 0.3 * p.rho, 0.5 * p.rho, 0.7 * p.rho, 0.9 * p.rho};
}

Report run_kernel_analyze(const Options& o) {
    const auto s = parse_step_set(o.steps);
    const auto p = structural_constants(s);
    std::vector<double> grid = !o.grid.empty() ? parse_grid(o.grid)
                               : !o.z_list.empty() ? parse_double_list(o.z_list, "--z")
                                                   : default_grid(p);
    const auto audit = assumption_report(s, grid);
    for (const auto& w : audit.warnings) std::cerr << "warning: " << w << '\n';
    Report rep;
    rep.facts = {{"tau", cell_text(p.tau)},
                 {"rho", cell_text(p.rho)},
                 {"beta", cell_text(p.beta)},
                 {"regime", std::string(to_string(p.regime))}};
    rep.table.columns = {"item", "name", "z", "value", "threshold", "passed", "note"};
    for (const auto& c : audit.checks)
        rep.table.rows.push_back({c.item, c.name, c.z, std::isfinite(c.value) ? json(c.value) : json(nullptr),
                                  c.threshold, c.passed, c.note});
    rep.payload = report_to_json(audit);
    return rep;
}

Report run_kernel_solve(const Options& o) {
    const auto s = parse_step_set(o.steps);
    const auto p = structural_constants(s);
    warn_if_periodic(p);
    const auto zs = parse_double_list(o.z_list, "--z");
    if (zs.empty()) fail(ErrorCategory::validation, "cli.BadArgument", "kernel solve needs --z");
    const auto us = o.u_list.empty() ? std::vector<double>{} : parse_double_list(o.u_list, "--u");
    Report rep;
    rep.table.columns = {"z", "quantity", "index", "value"};
    json solutions = json::array();
    for (double z : zs) {
        const auto sol = solve_meander_gf(s, z, us, p);
        for (std::size_t k = 0; k < sol.g_values.size(); ++k)
            rep.table.rows.push_back({z, "G", static_cast<int>(k), sol.g_values[k]});
        for (const auto& [u, f] : sol.f_at) rep.table.rows.push_back({z, "F", u, f});
        rep.table.rows.push_back({z, "det_abs", nullptr, sol.det_abs});
        rep.table.rows.push_back({z, "condition", nullptr, sol.condition});
        rep.table.rows.push_back({z, "cramer_deviation", nullptr, sol.cramer_deviation});
        json fj = json::array();
        for (const auto& [u, f] : sol.f_at) fj.push_back({{"u", u}, {"F", f}});
        solutions.push_back({{"z", z},
                             {"G", sol.g_values},
                             {"F", fj},
                             {"det_abs", sol.det_abs},
                             {"condition", sol.condition},
                             {"max_imag", sol.max_imag},
                             {"cramer_deviation", sol.cramer_deviation}});
    }
    rep.payload = profile_to_json(p);
    rep.payload["solutions"] = solutions;
    return rep;
}

Report run_kernel_puiseux(const Options& o) {
    const auto s = parse_step_set(o.steps);
    const auto p = structural_constants(s);
    warn_if_periodic(p);
    const auto grid = !o.grid.empty() ? parse_grid(o.grid)
                                      : std::vector<double>{0.9 * p.rho, 0.99 * p.rho, 0.999 * p.rho};
    const auto pr = verify_puiseux(s, grid);
    Report rep;
    rep.facts = {{"beta", cell_text(pr.beta)},
                 {"decreasing", pr.decreasing ? "true" : "false"},
                 {"success", pr.success ? "true" : "false"}};
    rep.table.columns = {"z", "u1", "ratio", "deviation"};
    json rows = json::array();
    for (const auto& r : pr.rows) {
        rep.table.rows.push_back({r.z, r.u1, r.ratio, r.deviation});
        rows.push_back({{"z", r.z}, {"u1", r.u1}, {"ratio", r.ratio}, {"deviation", r.deviation}});
    }
    rep.payload = {{"beta", pr.beta},
                   {"max_deviation", pr.max_deviation},
                   {"decreasing", pr.decreasing},
                   {"success", pr.success},
                   {"rows", rows}};
    return rep;
}

Report run_polyomino_enumerate(const Options& o) {
    const auto counts = cc_enumerate(o.hp_max, budget_of(o));
    Report rep;
    rep.table.columns = {"hp", "area", "count"};
    for (int hp = 2; hp <= o.hp_max; ++hp)
        for (std::int64_t a = 0; a <= cc_max_area(hp); ++a) {
            const Integer c = counts.count(hp, a);
            if (c != 0) rep.table.rows.push_back({hp, a, to_string(c)});
        }
    return rep;
}

Report run_polyomino_moments(const Options& o) {
    const auto table = cc_area_moments(o.hp_max, o.n, 0, budget_of(o));
    Report rep;
    rep.table.columns = {"hp", "n", "raw_sum", "total"};
    for (int hp = 0; hp <= table.m_max(); ++hp)
        for (int n = 0; n <= table.n_max(); ++n)
            rep.table.rows.push_back({hp, n, to_string(table.raw(hp, n, 0)), to_string(table.total(hp))});
    return rep;
}

Report run_polyomino_oracle(const Options& o) {
    const auto brute = cc_brute_oracle(o.area_max);
    Report rep;
    rep.table.columns = {"hp", "area", "count"};
    for (const auto& [key, c] : brute) rep.table.rows.push_back({key.first, key.second, to_string(c)});
    return rep;
}

Report run_polyomino_series(const Options& o) {
    const auto fe = cc_series_from_functional_equation(o.hp_max);
    const auto dp = cc_enumerate(o.hp_max, budget_of(o));
    Report rep;
    rep.facts = {{"sweeps", std::to_string(fe.sweeps)}, {"matches_column_dp", fe.counts == dp ? "true" : "false"}};
    rep.table.columns = {"hp", "area", "count"};
    for (int hp = 2; hp <= o.hp_max; ++hp)
        for (std::int64_t a = 0; a <= cc_max_area(hp); ++a) {
            const Integer c = fe.counts.count(hp, a);
            if (c != 0) rep.table.rows.push_back({hp, a, to_string(c)});
        }
    return rep;
}

Report run_polyomino_constants(const Options&) {
    const auto p = cc_structural_constants();
    Report rep;
    rep.table.columns = {"quantity", "value"};
    rep.table.rows = {{"rho", p.rho},     {"tau", p.tau},           {"beta", p.beta},
                      {"beta_puiseux", p.beta_puiseux}, {"area_scale", p.area_scale},
                      {"S(rho,tau)", p.s_tau},          {"S''(rho,tau)", p.s2_tau}};
    rep.payload = profile_to_json(p);
    return rep;
}

Report run_polyomino_converge(const Options& o) {
    const auto hps = parse_int_list(o.hp_list, "--hp");
    if (!std::is_sorted(hps.begin(), hps.end()) || hps.front() < 2)
        fail(ErrorCategory::validation, "cli.BadArgument", "--hp must be ascending and >= 2");
    const auto p = cc_structural_constants();
    const auto table = cc_area_moments(hps.back(), 1, 0, budget_of(o));
    const double limit = limiting_moment(MomentKind::BEA, {1}).to_double();
    std::vector<double> errs;
    Report rep;
    rep.table.columns = {"hp", "rescaled", "limit", "rel_error"};
    for (int hp : hps) {
        const double r = p.area_scale * to_double(table.expectation(hp, 1, 0)) / std::pow(hp, 1.5);
        errs.push_back(std::fabs(r - limit) / limit);
        rep.table.rows.push_back({hp, r, limit, errs.back()});
    }
    rep.facts.emplace_back("trend", detail::decreasing(errs) ? "decreasing" : "not_decreasing");
    return rep;
}

/// Tolerance that applies to one convergence row.
double row_tolerance(const Tolerances& tol, const ConvergenceReport& rep, const ConvergenceRow& row) {
    if (row.quantity == "signed" || row.quantity == "abs_area") return tol.signed_area;
    if (row.quantity == "concentration") return tol.concentration;
    if (row.quantity == "variance_ratio") return tol.variance_ratio;
    if (rep.cls == "excursion") {
        if (rep.regime != Regime::zero_drift) return tol.drift_independence;
        return row.orders[0] <= 1 ? tol.excursion_n1 : tol.excursion_n2;
    }
    if (rep.regime == Regime::negative_drift) return tol.negative_drift;
    if (row.orders[0] == 0) return tol.rayleigh;
    return tol.meander_joint;
}

Report run_converge(const Options& o) {
    const auto cls = parse_path_class(o.cls);
    const auto ms = parse_int_list(o.m_list, "--m");
    ConvergenceReport rep;
    if (cls == PathClass::walk) {
        std::vector<std::array<int, 3>> signed_orders;
        std::vector<std::pair<int, int>> abs_orders;
        for (const auto& item : split(o.orders, ',')) {
            const auto parts = parse_orders(item, split(item, ':').size() == 3 ? 3 : 2).front();
            if (parts.size() == 3)
                signed_orders.push_back({parts[0], parts[1], parts[2]});
            else
                abs_orders.emplace_back(parts[0], parts[1]);
        }
        if (!o.steps.empty() && !(parse_step_set(o.steps) == parse_step_set("-1:1,1:1")))
            fail(ErrorCategory::validation, "converge.UnsupportedStepSet", "walk reports are for the simple walk -1:1,1:1");
        rep = signed_report(ms, signed_orders, abs_orders, o.threads, budget_of(o));
    } else {
        const auto s = parse_step_set(o.steps);
        warn_if_periodic(structural_constants(s));
        std::vector<std::pair<int, int>> orders;
        for (const auto& ord : parse_orders(o.orders, 2)) orders.emplace_back(ord[0], ord[1]);
        rep = limit_report(s, cls, ms, orders, parse_scale_source(o.scale), o.threads, budget_of(o));
    }
    Report out;
    out.table.columns = report_columns();
    out.table.columns.push_back("tolerance");
    out.table.columns.push_back("within_tolerance");
    json payload = report_to_json(rep);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        std::vector<json> row;
        for (const auto& f : report_fields(rep, r)) row.emplace_back(f);
        const double tol = row_tolerance(o.tol, rep, r);
        row.emplace_back(tol);
        row.emplace_back(r.error < tol);
        payload["rows"][i]["tolerance"] = tol;
        payload["rows"][i]["within_tolerance"] = r.error < tol;
        out.table.rows.push_back(std::move(row));
    }
    out.payload = payload;
    return out;
}

Report run_selftest_cmd(const Options&, bool& all_passed) {
    const auto rows = run_selftest();
    Report rep;
    rep.table.columns = {"module", "check", "result", "detail"};
    all_passed = true;
    for (const auto& r : rows) {
        rep.table.rows.push_back({r.module, r.name, r.passed ? "PASS" : "FAIL", r.detail});
        all_passed = all_passed && r.passed;
    }
    rep.facts.emplace_back("summary", std::to_string(std::count_if(rows.begin(), rows.end(),
                                                                   [](const auto& r) { return r.passed; })) +
                                          "/" + std::to_string(rows.size()) + " checks passed");
    return rep;
}

/// Resolved options of the parsed command chain, including defaults.
json resolved_config(const CLI::App& app) {
    json options = json::object();
    std::string command;
    auto collect = [&](const CLI::App* a, const std::string& prefix) {
        for (const CLI::Option* opt : a->get_options()) {
            if (opt->get_lnames().empty()) continue;
            const std::string name = opt->get_lnames().front();
            if (name == "help" || name == "config") continue;
            std::string value;
            if (opt->count() > 0) {
                for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
            } else {
                value = opt->get_default_str();
            }
            if (opt->get_type_size() == 0 && value.empty()) value = "false";
            if (value.empty()) continue;
            options[prefix + name] = value;
        }
    };
    collect(&app, "");
    const CLI::App* cur = &app;
    while (true) {
        const auto subs = cur->get_subcommands();
        if (subs.empty()) break;
        cur = subs.front();
        command += (command.empty() ? "" : " ") + cur->get_name();
        collect(cur, "");
    }
    return {{"command", command}, {"options", options}};
}

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::validation: return 2;
        case ErrorCategory::resource: return 3;
        case ErrorCategory::numeric: return 4;
        case ErrorCategory::internal: return 5;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact and asymptotic area statistics of lattice paths"};
    app.require_subcommand(1, 1);
    app.allow_config_extras(false);
    app.fallthrough();
    Options o;
    app.set_config("--config", "", "TOML-style config file; command-line flags win");
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json", "table"}))
        ->capture_default_str();
    app.add_option("--output", o.output, "Write the report to this file instead of stdout");
    app.add_option("--memory-budget", o.memory_budget, "Memory cap for the dynamic programs, e.g. 512M or 2G")
        ->capture_default_str();
    app.add_option("--threads", o.threads, "Worker threads for independent grid points")
        ->check(CLI::Range(1u, 256u))
        ->capture_default_str();
    app.add_option("--tolerance-excursion-n1", o.tol.excursion_n1)->capture_default_str();
    app.add_option("--tolerance-excursion-n2", o.tol.excursion_n2)->capture_default_str();
    app.add_option("--tolerance-meander-joint", o.tol.meander_joint)->capture_default_str();
    app.add_option("--tolerance-negative-drift", o.tol.negative_drift)->capture_default_str();
    app.add_option("--tolerance-concentration", o.tol.concentration)->capture_default_str();
    app.add_option("--tolerance-variance-ratio", o.tol.variance_ratio)->capture_default_str();
    app.add_option("--tolerance-drift-independence", o.tol.drift_independence)->capture_default_str();
    app.add_option("--tolerance-rayleigh", o.tol.rayleigh)->capture_default_str();
    app.add_option("--tolerance-signed-area", o.tol.signed_area)->capture_default_str();

    auto steps_opt = [&](CLI::App* sub, bool required = true) {
        auto* opt = sub->add_option("--steps", o.steps, "Step set, e.g. \"-1:1,0:1,1:1\" or a JSON object");
        if (required) opt->required();
    };

    auto* analyze = app.add_subcommand("analyze", "Structural constants and drift regime of a step set");
    steps_opt(analyze);

    auto* enumerate = app.add_subcommand("enumerate", "Exact (area, altitude) distribution of length-m paths");
    steps_opt(enumerate);
    enumerate->add_option("--class", o.cls, "excursion, meander, bridge or walk")->capture_default_str();
    enumerate->add_option("--m", o.m, "Path length")->required()->check(CLI::Range(0, 100000));
    enumerate->add_flag("--signed", o.signed_area, "Bridges by (positive area, negative area)");

    auto* moments = app.add_subcommand("moments", "Exact raw area/altitude moment sums for lengths 0..m");
    steps_opt(moments);
    moments->add_option("--class", o.cls, "excursion, meander, bridge or walk")->capture_default_str();
    moments->add_option("--m", o.m, "Largest path length")->required()->check(CLI::Range(0, 100000));
    moments->add_option("--n", o.n, "Largest area order (k + l with --signed)")->capture_default_str();
    moments->add_option("--t", o.t, "Largest altitude order")->capture_default_str();
    moments->add_flag("--signed", o.signed_area, "Joint moments of (A+, A-, w_m) for walks");

    auto* limits = app.add_subcommand("limits", "Exact limiting moments and recursion tables");
    limits->add_option("--kind", o.kind, "bea, bma, meander, signed, abs or rayleigh")->capture_default_str();
    limits->add_option("--table", o.table_name, "Dump a recursion table instead: K, Q, C, Qnt, D, Dpm, Lpm, Labs");
    limits->add_option("--n", o.n, "Largest area order")->capture_default_str();
    limits->add_option("--t", o.t, "Largest altitude order")->capture_default_str();

    auto* kernel = app.add_subcommand("kernel", "Kernel-method numerics");
    kernel->require_subcommand(1, 1);
    auto* k_analyze = kernel->add_subcommand("analyze", "Assumption audit on a z grid");
    steps_opt(k_analyze);
    k_analyze->add_option("--z", o.z_list, "Comma-separated z values");
    k_analyze->add_option("--grid", o.grid, "Grid a:b:n");
    auto* k_solve = kernel->add_subcommand("solve", "Meander generating functions G_k(z) and F(z,1,u)");
    steps_opt(k_solve);
    k_solve->add_option("--z", o.z_list, "Comma-separated z values")->required();
    k_solve->add_option("--u", o.u_list, "Comma-separated u values for F(z,1,u)");
    auto* k_puiseux = kernel->add_subcommand("puiseux", "Square-root behaviour of u_1 near rho");
    steps_opt(k_puiseux);
    k_puiseux->add_option("--grid", o.grid, "Grid a:b:n inside (0.8 rho, rho)");

    auto* poly = app.add_subcommand("polyomino", "Column-convex polygons");
    poly->require_subcommand(1, 1);
    auto* p_enum = poly->add_subcommand("enumerate", "Counts by half-perimeter and area");
    p_enum->add_option("--hp-max", o.hp_max)->capture_default_str();
    auto* p_mom = poly->add_subcommand("moments", "Raw area moment sums by half-perimeter");
    p_mom->add_option("--hp-max", o.hp_max)->capture_default_str();
    p_mom->add_option("--n", o.n, "Largest area order")->capture_default_str();
    auto* p_series = poly->add_subcommand("series", "Counts from the functional equation");
    p_series->add_option("--hp-max", o.hp_max)->capture_default_str()->check(CLI::Range(0, 40));
    auto* p_oracle = poly->add_subcommand("oracle", "Brute-force column-convex polyomino counts");
    p_oracle->add_option("--area-max", o.area_max)->capture_default_str()->check(CLI::Range(0, 12));
    auto* p_const = poly->add_subcommand("constants", "rho, tau and scales of the polygon kernel");
    auto* p_conv = poly->add_subcommand("converge", "Rescaled mean area against E[BEA]");
    p_conv->add_option("--hp", o.hp_list, "Ascending half-perimeters")->capture_default_str();

    auto* converge = app.add_subcommand("converge", "Rescaled finite-m moments against their limits");
    steps_opt(converge, false);
    converge->add_option("--class", o.cls, "excursion, meander or walk")->capture_default_str();
    converge->add_option("--m", o.m_list, "Ascending path lengths, e.g. 64,128,256")->required();
    converge->add_option("--orders", o.orders, "n:t pairs, or k:l:t triples for walks")->capture_default_str();
    converge->add_option("--scale", o.scale, "corrected or printed area scale")->capture_default_str();

    auto* selftest = app.add_subcommand("selftest", "Run the invariant suite and print a pass/fail matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (converge->parsed() && parse_path_class(o.cls) != PathClass::walk && o.steps.empty())
            fail(ErrorCategory::validation, "cli.BadArgument", "converge needs --steps");
        Report rep;
        bool ok = true;
        if (analyze->parsed()) rep = run_analyze(o);
        else if (enumerate->parsed()) rep = run_enumerate(o);
        else if (moments->parsed()) rep = run_moments(o);
        else if (limits->parsed()) rep = run_limits(o);
        else if (k_analyze->parsed()) rep = run_kernel_analyze(o);
        else if (k_solve->parsed()) rep = run_kernel_solve(o);
        else if (k_puiseux->parsed()) rep = run_kernel_puiseux(o);
        else if (p_enum->parsed()) rep = run_polyomino_enumerate(o);
        else if (p_mom->parsed()) rep = run_polyomino_moments(o);
        else if (p_series->parsed()) rep = run_polyomino_series(o);
        else if (p_oracle->parsed()) rep = run_polyomino_oracle(o);
        else if (p_const->parsed()) rep = run_polyomino_constants(o);
        else if (p_conv->parsed()) rep = run_polyomino_converge(o);
        else if (converge->parsed()) rep = run_converge(o);
        else if (selftest->parsed()) rep = run_selftest_cmd(o, ok);

        const json config = resolved_config(app);
        if (o.output.empty()) {
            emit(std::cout, o.format, config, rep);
        } else {
            std::ofstream f(o.output);
            if (!f) fail(ErrorCategory::resource, "cli.OutputUnwritable", "cannot open " + o.output);
            emit(f, o.format, config, rep);
        }
        return ok ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
