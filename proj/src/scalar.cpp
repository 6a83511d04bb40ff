#include "pfl/scalar.hpp"

#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>

namespace pfl {

Rational make_rational(const Integer& num, const Integer& den) {
    if (sgn(den) == 0) throw Error(Errc::division_by_zero, "rational with zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw Error(Errc::parse_error, "empty rational literal");

    bool negative = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        i = 1;
    }
    auto digits = [&](std::size_t& pos) {
        std::string out;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) out.push_back(s[pos++]);
        return out;
    };
    std::string whole = digits(i);
    Rational value;
    if (i < s.size() && s[i] == '.') {
        ++i;
        std::string frac = digits(i);
        if (whole.empty() && frac.empty()) throw Error(Errc::parse_error, "bad decimal: " + text);
        Integer scale = 1;
        for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
        Integer num = Integer(whole.empty() ? "0" : whole) * scale + Integer(frac.empty() ? "0" : frac);
        value = make_rational(num, scale);
    } else if (i < s.size() && s[i] == '/') {
        ++i;
        std::string den = digits(i);
        if (whole.empty() || den.empty()) throw Error(Errc::parse_error, "bad fraction: " + text);
        value = make_rational(Integer(whole), Integer(den));
    } else {
        if (whole.empty()) throw Error(Errc::parse_error, "bad integer: " + text);
        value = Rational(Integer(whole));
    }
    if (i != s.size()) throw Error(Errc::parse_error, "trailing characters in rational: " + text);
    return negative ? Rational(-value) : value;
}

std::string rational_str(const Rational& q) {
    return q.get_str();
}

std::pair<Integer, Integer> square_free_decompose(Integer n) {
    if (sgn(n) <= 0) throw Error(Errc::negative_radicand, "square-free decomposition needs n > 0");
    Integer square_root = 1;
    Integer square_free = 1;
    if (mpz_perfect_square_p(n.get_mpz_t())) {
        Integer r;
        mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
        return {r, Integer(1)};
    }
    const unsigned long trial_bound = 10'000'000UL;
    for (unsigned long p = 2; Integer(p) * p <= n && p <= trial_bound; p == 2 ? p = 3 : p += 2) {
        if (!mpz_divisible_ui_p(n.get_mpz_t(), p)) continue;
        unsigned count = 0;
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
            ++count;
        }
        for (unsigned k = 0; k + 1 < count; k += 2) square_root *= p;
        if (count % 2 == 1) square_free *= p;
    }
    if (n > 1) {
        if (mpz_perfect_square_p(n.get_mpz_t())) {
            Integer r;
            mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
            square_root *= r;
        } else {
            square_free *= n; // residual treated as square-free
        }
    }
    return {square_root, square_free};
}

QuadExt::QuadExt(const Rational& rational_part, const Rational& surd_part, const Integer& radicand)
    : a_(rational_part), b_(surd_part), d_(radicand) {
    if (sgn(d_) < 0) throw Error(Errc::negative_radicand, "negative radicand " + d_.get_str());
    if (sgn(b_) == 0 || sgn(d_) == 0) { // b*sqrt(0) == 0
        b_ = 0;
        d_ = 0;
        return;
    }
    auto [root, core] = square_free_decompose(d_);
    b_ *= root;
    d_ = core;
    if (d_ == 1) { // radicand collapsed; value is rational
        a_ += b_;
        b_ = 0;
        d_ = 0;
    }
}

Integer QuadExt::join_radicand(const QuadExt& x, const QuadExt& y) {
    if (sgn(x.d_) == 0) return y.d_;
    if (sgn(y.d_) == 0) return x.d_;
    if (x.d_ == y.d_) return x.d_;
    throw Error(Errc::incompatible_radicands,
                "cannot combine sqrt(" + x.d_.get_str() + ") with sqrt(" + y.d_.get_str() + ")");
}

int QuadExt::sign() const {
    int sa = sgn(a_);
    int sb = sgn(b_);
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // opposite signs: compare a^2 with b^2 d; equality impossible for square-free d >= 2
    Rational lhs = a_ * a_;
    Rational rhs = b_ * b_ * Rational(d_);
    int c = cmp(lhs, rhs);
    if (c == 0) return 0;
    return c > 0 ? sa : sb;
}

double QuadExt::to_double() const {
    double value = a_.get_d();
    if (sgn(b_) != 0) value += b_.get_d() * std::sqrt(d_.get_d());
    return value;
}

QuadExt operator+(const QuadExt& x, const QuadExt& y) {
    Integer d = QuadExt::join_radicand(x, y);
    Rational b = x.b_ + y.b_;
    if (sgn(b) == 0) return QuadExt(x.a_ + y.a_);
    return QuadExt(x.a_ + y.a_, b, d, nullptr);
}

QuadExt operator-(const QuadExt& x, const QuadExt& y) {
    return x + (-y);
}

QuadExt operator*(const QuadExt& x, const QuadExt& y) {
    Integer d = QuadExt::join_radicand(x, y);
    Rational a = x.a_ * y.a_ + x.b_ * y.b_ * Rational(d);
    Rational b = x.a_ * y.b_ + x.b_ * y.a_;
    if (sgn(b) == 0) return QuadExt(a);
    return QuadExt(a, b, d, nullptr);
}

QuadExt operator/(const QuadExt& x, const QuadExt& y) {
    if (y.is_zero()) throw Error(Errc::division_by_zero, "division by zero");
    Integer d = QuadExt::join_radicand(x, y);
    // multiply by the conjugate: 1/(a + b sqrt d) = (a - b sqrt d)/(a^2 - b^2 d)
    Rational norm = y.a_ * y.a_ - y.b_ * y.b_ * Rational(d);
    QuadExt conj = sgn(y.b_) == 0 ? QuadExt(y.a_) : QuadExt(y.a_, -y.b_, d, nullptr);
    QuadExt num = x * conj;
    if (sgn(num.b_) == 0) return QuadExt(num.a_ / norm);
    return QuadExt(num.a_ / norm, num.b_ / norm, d, nullptr);
}

namespace {

std::string signed_term(const Integer& coeff, const Integer& radicand, bool leading) {
    std::string out;
    Integer c = coeff;
    bool negative = sgn(c) < 0;
    if (negative) c = -c;
    if (leading)
        out += negative ? "-" : "";
    else
        out += negative ? " - " : " + ";
    if (sgn(radicand) == 0) {
        out += c.get_str();
    } else {
        if (c != 1) out += c.get_str() + "*";
        out += "sqrt(" + radicand.get_str() + ")";
    }
    return out;
}

} // namespace

std::string QuadExt::str() const {
    if (is_rational()) return rational_str(a_);
    // render over a common positive denominator: (p + q*sqrt(d))/r
    Integer r;
    mpz_lcm(r.get_mpz_t(), a_.get_den().get_mpz_t(), b_.get_den().get_mpz_t());
    Integer p = a_.get_num() * (r / a_.get_den());
    Integer q = b_.get_num() * (r / b_.get_den());
    std::string body;
    if (sgn(p) == 0) {
        body = signed_term(q, d_, true);
    } else {
        body = signed_term(p, Integer(0), true) + signed_term(q, d_, false);
    }
    if (r == 1) return body;
    return "(" + body + ")/" + r.get_str();
}

QuadExt sqrt_adjoin(const Rational& x) {
    if (sgn(x) < 0) throw Error(Errc::negative_radicand, "sqrt of negative rational " + rational_str(x));
    if (sgn(x) == 0) return QuadExt(0);
    // sqrt(n/m) = sqrt(n m) / m
    Integer nm = x.get_num() * x.get_den();
    auto [root, core] = square_free_decompose(nm);
    Rational coeff = make_rational(root, x.get_den());
    if (core == 1) return QuadExt(coeff);
    return QuadExt(Rational(0), coeff, core);
}

const QuadExt& ProjectiveScalar::finite() const {
    if (!value_) throw Error(Errc::indeterminate_form, "expected a finite value, got infinity");
    return *value_;
}

double ProjectiveScalar::to_double() const {
    return is_infinity() ? std::numeric_limits<double>::infinity() : value_->to_double();
}

ProjectiveScalar operator+(const ProjectiveScalar& x, const ProjectiveScalar& y) {
    if (x.is_infinity() && y.is_infinity())
        throw Error(Errc::indeterminate_form, "inf + inf is indeterminate on the projective line");
    if (x.is_infinity() || y.is_infinity()) return ProjectiveScalar::infinity();
    return ProjectiveScalar(x.finite() + y.finite());
}

ProjectiveScalar operator-(const ProjectiveScalar& x, const ProjectiveScalar& y) {
    if (x.is_infinity() && y.is_infinity())
        throw Error(Errc::indeterminate_form, "inf - inf is indeterminate");
    if (x.is_infinity() || y.is_infinity()) return ProjectiveScalar::infinity();
    return ProjectiveScalar(x.finite() - y.finite());
}

ProjectiveScalar operator*(const ProjectiveScalar& x, const ProjectiveScalar& y) {
    if (x.is_infinity() || y.is_infinity()) {
        const ProjectiveScalar& other = x.is_infinity() ? y : x;
        if (other.is_finite() && other.finite().is_zero())
            throw Error(Errc::indeterminate_form, "0 * inf is indeterminate");
        return ProjectiveScalar::infinity();
    }
    return ProjectiveScalar(x.finite() * y.finite());
}

ProjectiveScalar operator/(const ProjectiveScalar& x, const ProjectiveScalar& y) {
    if (x.is_infinity() && y.is_infinity())
        throw Error(Errc::indeterminate_form, "inf / inf is indeterminate");
    if (y.is_infinity()) return ProjectiveScalar(QuadExt(0));
    if (y.finite().is_zero()) throw Error(Errc::division_by_zero, "division by zero");
    if (x.is_infinity()) return ProjectiveScalar::infinity();
    return ProjectiveScalar(x.finite() / y.finite());
}

ProjectiveScalar ProjectiveScalar::operator-() const {
    if (is_infinity()) return infinity();
    return ProjectiveScalar(-finite());
}

namespace {

// Minimal recursive-descent parser for the rendered scalar forms.
struct ScalarParser {
    const std::string& s;
    std::size_t pos = 0;

    explicit ScalarParser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    bool peek_digit() {
        skip_ws();
        return pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]));
    }
    std::string digits() {
        skip_ws();
        std::string out;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) out.push_back(s[pos++]);
        if (out.empty()) throw Error(Errc::parse_error, "expected digits in: " + s);
        return out;
    }
    bool match_word(const std::string& word) {
        skip_ws();
        if (s.compare(pos, word.size(), word) == 0) {
            pos += word.size();
            return true;
        }
        return false;
    }

    Rational number() {
        std::string whole = digits();
        if (eat('.')) {
            std::string frac = digits();
            Integer scale = 1;
            for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
            return make_rational(Integer(whole) * scale + Integer(frac), scale);
        }
        if (eat('/')) return make_rational(Integer(whole), Integer(digits()));
        return Rational(Integer(whole));
    }

    // term := number [ '*'? sqrt ] | sqrt
    QuadExt term() {
        skip_ws();
        if (match_word("sqrt")) {
            if (!eat('(')) throw Error(Errc::parse_error, "expected ( after sqrt");
            Integer d(digits());
            if (!eat(')')) throw Error(Errc::parse_error, "expected ) after sqrt radicand");
            return QuadExt(Rational(0), Rational(1), d);
        }
        Rational coeff = number();
        std::size_t save = pos;
        bool star = eat('*');
        if (match_word("sqrt")) {
            if (!eat('(')) throw Error(Errc::parse_error, "expected ( after sqrt");
            Integer d(digits());
            if (!eat(')')) throw Error(Errc::parse_error, "expected ) after sqrt radicand");
            return QuadExt(Rational(0), coeff, d);
        }
        if (star) pos = save; // bare '*': rewind, treat as trailing junk
        return QuadExt(coeff);
    }

    QuadExt sum() {
        bool neg = false;
        if (eat('-'))
            neg = true;
        else
            eat('+');
        QuadExt acc = term();
        if (neg) acc = -acc;
        while (true) {
            if (eat('+')) {
                acc += term();
            } else if (eat('-')) {
                acc -= term();
            } else {
                break;
            }
        }
        return acc;
    }

    QuadExt scalar() {
        skip_ws();
        QuadExt value;
        if (eat('(')) {
            value = sum();
            if (!eat(')')) throw Error(Errc::parse_error, "unbalanced parenthesis in: " + s);
        } else {
            value = sum();
        }
        if (eat('/')) {
            if (!peek_digit()) throw Error(Errc::parse_error, "expected denominator in: " + s);
            value /= QuadExt(number());
        }
        skip_ws();
        if (pos != s.size()) throw Error(Errc::parse_error, "trailing characters in scalar: " + s);
        return value;
    }
};

} // namespace

QuadExt parse_quad(const std::string& text) {
    ScalarParser parser(text);
    return parser.scalar();
}

ProjectiveScalar parse_scalar(const std::string& text) {
    std::string trimmed;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
    if (trimmed == "inf" || trimmed == "oo" || trimmed == "infinity")
        return ProjectiveScalar::infinity();
    return ProjectiveScalar(parse_quad(text));
}

} // namespace pfl
