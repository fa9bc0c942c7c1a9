#pragma once

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "error.hpp"
#include "numbers.hpp"

namespace patharea {

/// Exact scalar coeff * 2^(half_pow2/2) * pi^(half_powpi/2).
///
/// Normal form: half_pow2 is 0 or 1 (even powers of two are folded into the
/// rational coefficient) and a zero coefficient carries no radical part.
class ExactRadical {
public:
    ExactRadical() = default;
    ExactRadical(Rational coeff, long half_pow2 = 0, long half_powpi = 0)
        : coeff_(std::move(coeff)), half_pow2_(half_pow2), half_powpi_(half_powpi) {
        normalize();
    }
    ExactRadical(long value) : ExactRadical(Rational(value)) {}

    const Rational& coeff() const noexcept { return coeff_; }
    long half_pow2() const noexcept { return half_pow2_; }
    long half_powpi() const noexcept { return half_powpi_; }
    bool is_zero() const { return coeff_ == 0; }
    bool is_rational() const { return half_pow2_ == 0 && half_powpi_ == 0; }

    static ExactRadical sqrt2() { return ExactRadical(Rational(1), 1, 0); }
    static ExactRadical sqrt_pi() { return ExactRadical(Rational(1), 0, 1); }
    /// 2^(e/2) for any integer e.
    static ExactRadical pow_sqrt2(long e) { return ExactRadical(Rational(1), e, 0); }

    friend ExactRadical operator*(const ExactRadical& a, const ExactRadical& b) {
        return ExactRadical(a.coeff_ * b.coeff_, a.half_pow2_ + b.half_pow2_, a.half_powpi_ + b.half_powpi_);
    }
    friend ExactRadical operator/(const ExactRadical& a, const ExactRadical& b) {
        if (b.is_zero()) fail(ErrorCategory::numeric, "limits.DivisionByZero", "division by a zero radical");
        return ExactRadical(a.coeff_ / b.coeff_, a.half_pow2_ - b.half_pow2_, a.half_powpi_ - b.half_powpi_);
    }
    friend ExactRadical operator+(const ExactRadical& a, const ExactRadical& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.half_pow2_ != b.half_pow2_ || a.half_powpi_ != b.half_powpi_)
            fail(ErrorCategory::numeric, "limits.RadicalMismatch",
                 "cannot add " + a.to_string() + " and " + b.to_string());
        return ExactRadical(a.coeff_ + b.coeff_, a.half_pow2_, a.half_powpi_);
    }
    friend ExactRadical operator-(const ExactRadical& a) {
        return ExactRadical(-a.coeff_, a.half_pow2_, a.half_powpi_);
    }
    friend ExactRadical operator-(const ExactRadical& a, const ExactRadical& b) { return a + (-b); }
    friend bool operator==(const ExactRadical& a, const ExactRadical& b) {
        return a.coeff_ == b.coeff_ && a.half_pow2_ == b.half_pow2_ && a.half_powpi_ == b.half_powpi_;
    }

    double to_double() const {
        const double r = patharea::to_double(coeff_);
        return r * std::pow(std::numbers::sqrt2, static_cast<double>(half_pow2_)) *
               std::pow(std::numbers::pi, 0.5 * static_cast<double>(half_powpi_));
    }

    /// "p/q * 2^(a/2) * pi^(b/2)", omitting unit factors.
    std::string to_string() const {
        std::string out = patharea::to_string(coeff_);
        if (half_pow2_ != 0) out += " * 2^(" + std::to_string(half_pow2_) + "/2)";
        if (half_powpi_ != 0) out += " * pi^(" + std::to_string(half_powpi_) + "/2)";
        return out;
    }

    friend std::ostream& operator<<(std::ostream& os, const ExactRadical& x) { return os << x.to_string(); }

private:
    void normalize() {
        coeff_.canonicalize();
        if (coeff_ == 0) {
            half_pow2_ = 0;
            half_powpi_ = 0;
            return;
        }
        // floor division so that the remainder lands in {0, 1}
        const long q = half_pow2_ >= 0 ? half_pow2_ / 2 : -((-half_pow2_ + 1) / 2);
        const long r = half_pow2_ - 2 * q;
        if (q > 0)
            mpz_mul_2exp(coeff_.get_num_mpz_t(), coeff_.get_num_mpz_t(), static_cast<unsigned long>(q));
        else if (q < 0)
            mpz_mul_2exp(coeff_.get_den_mpz_t(), coeff_.get_den_mpz_t(), static_cast<unsigned long>(-q));
        coeff_.canonicalize();
        half_pow2_ = r;
    }

    Rational coeff_{0};
    long half_pow2_ = 0;
    long half_powpi_ = 0;
};

/// Gamma(twice_x / 2) for an integer or half-integer argument, exactly.
/// Poles (x = 0, -1, -2, ...) raise limits.GammaPole.
inline ExactRadical gamma_half(long twice_x) {
    if (twice_x % 2 == 0) {
        const long x = twice_x / 2;
        if (x <= 0) fail(ErrorCategory::numeric, "limits.GammaPole", "Gamma has a pole at " + std::to_string(x));
        return ExactRadical(Rational(factorial(static_cast<unsigned long>(x - 1))));
    }
    if (twice_x > 0) {
        // Gamma(j + 1/2) = (2j)! sqrt(pi) / (4^j j!)
        const unsigned long j = static_cast<unsigned long>((twice_x - 1) / 2);
        Rational c(factorial(2 * j), pow_int(Integer(4), j) * factorial(j));
        return ExactRadical(c, 0, 1);
    }
    // Gamma(1/2 - j) = (-4)^j j! sqrt(pi) / (2j)!
    const unsigned long j = static_cast<unsigned long>((1 - twice_x) / 2);
    Rational c(pow_int(Integer(-4), j) * factorial(j), factorial(2 * j));
    return ExactRadical(c, 0, 1);
}

}  // namespace patharea
