#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace patharea {

using Integer = mpz_class;
using Rational = mpq_class;

inline std::string to_string(const Integer& x) { return x.get_str(); }

/// Integer when the denominator is 1, otherwise "p/q".
inline std::string to_string(const Rational& x) {
    if (x.get_den() == 1) return x.get_num().get_str();
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

inline double to_double(const Integer& x) { return x.get_d(); }
inline double to_double(const Rational& x) { return mpq_get_d(x.get_mpq_t()); }

inline Rational to_rational(const Integer& x) { return Rational(x); }
inline Rational to_rational(const Rational& x) { return x; }

/// Parses "p/q", "-p/q" or a plain integer. No whitespace, no decimals.
inline Rational parse_rational(std::string_view text) {
    auto bad = [&] {
        fail(ErrorCategory::validation, "numbers.MalformedRational",
             "not an integer or p/q rational: '" + std::string(text) + "'");
    };
    if (text.empty()) bad();
    auto is_int = [](std::string_view s) {
        std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    auto strip_plus = [](std::string_view s) { return (!s.empty() && s[0] == '+') ? s.substr(1) : s; };
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        if (!is_int(text)) bad();
        return Rational(Integer(std::string(strip_plus(text))));
    }
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (!is_int(num) || !is_int(den) || den[0] == '-' || den[0] == '+') bad();
    Integer d{std::string(den)};
    if (d == 0) bad();
    Rational r(Integer(std::string(strip_plus(num))), d);
    r.canonicalize();
    return r;
}

inline Integer pow_int(const Integer& base, unsigned long exp) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
    return r;
}

inline Rational pow_rat(const Rational& base, long exp) {
    Rational r(1);
    Rational b = exp >= 0 ? base : Rational(1) / base;
    for (long e = exp >= 0 ? exp : -exp; e > 0; --e) r *= b;
    return r;
}

inline Integer factorial(unsigned long n) {
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

inline Integer binomial(unsigned long n, unsigned long k) {
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

/// Pascal triangle rows 0..n as machine integers; exact up to n = 60.
inline std::vector<std::vector<std::int64_t>> binomial_rows(int n) {
    std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        rows[i].assign(static_cast<std::size_t>(i) + 1, 1);
        for (int j = 1; j < i; ++j) rows[i][j] = rows[i - 1][j - 1] + rows[i - 1][j];
    }
    return rows;
}

/// Powers 0..max_exp of a (possibly negative) small integer.
inline std::vector<Integer> integer_powers(long base, int max_exp) {
    std::vector<Integer> p(static_cast<std::size_t>(max_exp) + 1);
    p[0] = 1;
    for (int e = 1; e <= max_exp; ++e) p[e] = p[e - 1] * base;
    return p;
}

inline bool is_integral(const Rational& x) { return x.get_den() == 1; }

}  // namespace patharea
