#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <utility>

#include "pfl/errors.hpp"

namespace pfl {

using Rational = mpq_class;
using Integer = mpz_class;

/// Exact rational from integer pair; canonicalizes and enforces den > 0.
Rational make_rational(const Integer& num, const Integer& den);

/// Parses "3/2", "-7", "0.6" (decimal strings become exact fractions, 0.6 -> 3/5).
Rational parse_rational(const std::string& text);

std::string rational_str(const Rational& q);

/// Splits n > 0 as s^2 * d with d square-free (trial division; residual factors
/// beyond 10^7 whose square divides n are left inside d).
std::pair<Integer, Integer> square_free_decompose(Integer n);

/// Element of Q(sqrt(d)): rational_part + surd_part * sqrt(radicand).
/// radicand is square-free and >= 2, or 0 for plain rationals. Values are
/// immutable after construction; all arithmetic is exact. Mixing two distinct
/// radicands is a domain error rather than an extension to a larger field.
class QuadExt {
public:
    QuadExt() : a_(0), b_(0), d_(0) {}
    QuadExt(const Rational& rational) : a_(rational), b_(0), d_(0) {} // NOLINT: implicit by design
    QuadExt(long value) : a_(value), b_(0), d_(0) {}                  // NOLINT
    QuadExt(const Rational& rational_part, const Rational& surd_part, const Integer& radicand);

    const Rational& rational_part() const { return a_; }
    const Rational& surd_part() const { return b_; }
    const Integer& radicand() const { return d_; }

    bool is_rational() const { return sgn(b_) == 0; }
    bool is_zero() const { return sgn(a_) == 0 && sgn(b_) == 0; }

    /// Exact sign in {-1,0,+1}, decided by comparing squares.
    int sign() const;

    double to_double() const;
    std::string str() const;

    QuadExt operator-() const { return QuadExt(-a_, -b_, d_, nullptr); }

    friend QuadExt operator+(const QuadExt& x, const QuadExt& y);
    friend QuadExt operator-(const QuadExt& x, const QuadExt& y);
    friend QuadExt operator*(const QuadExt& x, const QuadExt& y);
    friend QuadExt operator/(const QuadExt& x, const QuadExt& y);

    QuadExt& operator+=(const QuadExt& y) { return *this = *this + y; }
    QuadExt& operator-=(const QuadExt& y) { return *this = *this - y; }
    QuadExt& operator*=(const QuadExt& y) { return *this = *this * y; }
    QuadExt& operator/=(const QuadExt& y) { return *this = *this / y; }

    friend bool operator==(const QuadExt& x, const QuadExt& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && x.d_ == y.d_;
    }
    friend bool operator!=(const QuadExt& x, const QuadExt& y) { return !(x == y); }
    friend bool operator<(const QuadExt& x, const QuadExt& y) { return (x - y).sign() < 0; }
    friend bool operator>(const QuadExt& x, const QuadExt& y) { return (x - y).sign() > 0; }
    friend bool operator<=(const QuadExt& x, const QuadExt& y) { return (x - y).sign() <= 0; }
    friend bool operator>=(const QuadExt& x, const QuadExt& y) { return (x - y).sign() >= 0; }

private:
    // Raw constructor, skips normalization (components already canonical).
    QuadExt(Rational a, Rational b, Integer d, std::nullptr_t)
        : a_(std::move(a)), b_(std::move(b)), d_(std::move(d)) {}

    static Integer join_radicand(const QuadExt& x, const QuadExt& y);

    Rational a_;
    Rational b_;
    Integer d_;
};

inline QuadExt abs(const QuadExt& x) { return x.sign() < 0 ? -x : x; }

/// Exact square root of a non-negative rational as an element of Q(sqrt(d)).
QuadExt sqrt_adjoin(const Rational& x);

/// Point of the projective line over a quadratic field: finite value or infinity.
class ProjectiveScalar {
public:
    ProjectiveScalar() : value_(QuadExt(0)) {}
    ProjectiveScalar(QuadExt value) : value_(std::move(value)) {} // NOLINT: implicit by design
    static ProjectiveScalar infinity() { return ProjectiveScalar(Inf{}); }

    bool is_infinity() const { return !value_.has_value(); }
    bool is_finite() const { return value_.has_value(); }
    const QuadExt& finite() const;

    std::string str() const { return is_infinity() ? "inf" : value_->str(); }
    double to_double() const;

    friend bool operator==(const ProjectiveScalar& x, const ProjectiveScalar& y) {
        if (x.is_infinity() || y.is_infinity()) return x.is_infinity() && y.is_infinity();
        return *x.value_ == *y.value_;
    }
    friend bool operator!=(const ProjectiveScalar& x, const ProjectiveScalar& y) { return !(x == y); }

    friend ProjectiveScalar operator+(const ProjectiveScalar& x, const ProjectiveScalar& y);
    friend ProjectiveScalar operator-(const ProjectiveScalar& x, const ProjectiveScalar& y);
    friend ProjectiveScalar operator*(const ProjectiveScalar& x, const ProjectiveScalar& y);
    friend ProjectiveScalar operator/(const ProjectiveScalar& x, const ProjectiveScalar& y);
    ProjectiveScalar operator-() const;

private:
    struct Inf {};
    explicit ProjectiveScalar(Inf) : value_(std::nullopt) {}
    std::optional<QuadExt> value_;
};

/// Parses rendered exact scalars: "3/2", "0.6", "sqrt(5)", "2*sqrt(3)",
/// "(-3 + sqrt(5))/2", "inf".
ProjectiveScalar parse_scalar(const std::string& text);
QuadExt parse_quad(const std::string& text);

} // namespace pfl
