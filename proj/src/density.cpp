#include "pfl/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

namespace pfl {

LinearFactorDensity::LinearFactorDensity(std::vector<LinearFactorTerm> terms) : terms_(std::move(terms)) {
    for (const auto& term : terms_)
        for (const auto& f : term.factors)
            if (f.p.is_zero() && f.q.is_zero())
                throw Error(Errc::unsupported, "zero linear factor");
}

LinearFactorDensity LinearFactorDensity::one_over(std::vector<LinearFactor> factors, QuadExt constant) {
    LinearFactorTerm term{std::move(constant), std::move(factors)};
    return LinearFactorDensity({term});
}

QuadExt LinearFactorDensity::eval_exact(const QuadExt& x) const {
    QuadExt sum(0);
    for (const auto& term : terms_) {
        QuadExt value = term.constant;
        for (const auto& f : term.factors) {
            QuadExt den = f.p + f.q * x;
            if (den.is_zero())
                throw Error(Errc::pole_at_point,
                            "density pole: " + linear_str(f.p, f.q, "x") + " = 0 at x = " + x.str());
            value /= den;
        }
        sum += value;
    }
    return sum;
}

double LinearFactorDensity::eval_double(double x) const {
    double sum = 0.0;
    for (const auto& term : terms_) {
        double value = term.constant.to_double();
        for (const auto& f : term.factors) {
            double den = f.p.to_double() + f.q.to_double() * x;
            value /= den;
        }
        sum += value;
    }
    if (!std::isfinite(sum))
        throw Error(Errc::pole_at_point, "density pole near x = " + std::to_string(x));
    return sum;
}

LinearFactorDensity LinearFactorDensity::pullback(const MoebiusBranch& v) const {
    QuadExt abs_det = abs(v.det());
    std::vector<LinearFactorTerm> out;
    out.reserve(terms_.size());
    for (const auto& term : terms_) {
        if (term.factors.size() > 2)
            throw Error(Errc::unsupported, "pullback supports at most two linear factors per term");
        LinearFactorTerm pulled;
        pulled.constant = term.constant * abs_det;
        for (const auto& f : term.factors) {
            // p + q V(x) = (p(a+bx) + q(c+dx)) / (a+bx)
            QuadExt np = f.p * v.a() + f.q * v.c();
            QuadExt nq = f.p * v.b() + f.q * v.d();
            pulled.factors.push_back({np, nq});
        }
        // (a+bx)^(#factors) from clearing denominators, (a+bx)^-2 from |omega|
        for (std::size_t k = term.factors.size(); k < 2; ++k)
            pulled.factors.push_back({v.a(), v.b()});
        out.push_back(std::move(pulled));
    }
    return LinearFactorDensity(std::move(out));
}

LinearFactorDensity LinearFactorDensity::operator-() const {
    std::vector<LinearFactorTerm> out = terms_;
    for (auto& term : out) term.constant = -term.constant;
    return LinearFactorDensity(std::move(out));
}

LinearFactorDensity operator+(const LinearFactorDensity& f, const LinearFactorDensity& g) {
    std::vector<LinearFactorTerm> out = f.terms_;
    out.insert(out.end(), g.terms_.begin(), g.terms_.end());
    return LinearFactorDensity(std::move(out));
}

LinearFactorDensity operator-(const LinearFactorDensity& f, const LinearFactorDensity& g) {
    return f + (-g);
}

std::string LinearFactorDensity::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& term : terms_) {
        QuadExt c = term.constant;
        bool negative = c.sign() < 0;
        if (negative) c = -c;
        if (first) {
            if (negative) out += "-";
        } else {
            out += negative ? " - " : " + ";
        }
        first = false;
        std::string num = c.str();
        if (num.find(' ') != std::string::npos) num = "(" + num + ")";
        if (term.factors.empty()) {
            out += num;
            continue;
        }
        std::string den;
        for (const auto& f : term.factors) {
            if (!den.empty()) den += "*";
            den += "(" + linear_str(f.p, f.q, "x") + ")";
        }
        if (term.factors.size() > 1) den = "(" + den + ")";
        out += num + "/" + den;
    }
    return out;
}

SeriesDensity::SeriesDensity(LinearFactorDensity base, MoebiusBranch jump, std::uint64_t stride)
    : base_(std::move(base)), jump_(std::move(jump)), stride_(stride),
      jump_step_(iterate(jump_, stride >= 1 ? stride - 1 : 0)) {
    if (stride_ < 2) throw Error(Errc::unsupported, "series stride must be >= 2");
}

QuadExt SeriesDensity::term_exact(std::size_t k, const QuadExt& x) const {
    MoebiusBranch power = iterate(jump_, exponent(k));
    return base_.eval_exact(power.eval_finite(x)) * power.jacobian(x, /*absolute=*/true);
}

QuadExt SeriesDensity::partial_sum_exact(std::size_t n, const QuadExt& x) const {
    QuadExt sum(0);
    MoebiusBranch power = MoebiusBranch::identity();
    for (std::size_t k = 0; k < n; ++k) {
        QuadExt term = base_.eval_exact(power.eval_finite(x)) * power.jacobian(x, true);
        sum += term_sign(k) > 0 ? term : -term;
        power = compose(k % 2 == 0 ? jump_ : jump_step_, power);
    }
    return sum;
}

namespace {

// Double-precision view of a linear-factor density, hoisted out of term loops.
struct ClosedD {
    struct TermD {
        double c;
        std::vector<std::array<double, 2>> factors;
    };
    std::vector<TermD> terms;

    explicit ClosedD(const LinearFactorDensity& d) {
        for (const auto& term : d.terms()) {
            TermD t{term.constant.to_double(), {}};
            for (const auto& f : term.factors) t.factors.push_back({f.p.to_double(), f.q.to_double()});
            terms.push_back(std::move(t));
        }
    }
    double operator()(double x) const {
        double sum = 0.0;
        for (const auto& t : terms) {
            double v = t.c;
            for (const auto& f : t.factors) v /= f[0] + f[1] * x;
            sum += v;
        }
        return sum;
    }
};

struct Mat2 {
    double a, b, c, d;
    static Mat2 from(const MoebiusBranch& v) {
        return {v.a().to_double(), v.b().to_double(), v.c().to_double(), v.d().to_double()};
    }
    Mat2 mul(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    void renorm() {
        double m = std::max(std::max(std::fabs(a), std::fabs(b)), std::max(std::fabs(c), std::fabs(d)));
        if (m > 1e100 || (m > 0 && m < 1e-100)) {
            a /= m;
            b /= m;
            c /= m;
            d /= m;
        }
    }
};

} // namespace

// Walks |term_k(x)| for k = 0, 1, 2, ... maintaining the scaled matrix of
// V^{e_k}. Moebius values and Jacobians are scale-invariant, so renormalizing
// the matrix keeps long runs inside double range.
struct SeriesDensity::TermStream {
    ClosedD base;
    Mat2 jump, step, m;
    double x;
    std::size_t k = 0;

    TermStream(const SeriesDensity& s, double x_)
        : base(s.base()), jump(Mat2::from(s.jump())), step(Mat2::from(s.jump_step_)),
          m{1, 0, 0, 1}, x(x_) {}

    double next() {
        double den = m.a + m.b * x;
        double value = (m.c + m.d * x) / den;
        double det = m.a * m.d - m.b * m.c;
        double omega = std::fabs(det) / (den * den);
        double term = base(value) * omega;
        m = (k % 2 == 0 ? jump : step).mul(m);
        m.renorm();
        ++k;
        if (!std::isfinite(term))
            throw Error(Errc::pole_at_point, "series term pole near x = " + std::to_string(x));
        return term;
    }
};

double SeriesDensity::partial_sum_double(std::size_t n, double x) const {
    TermStream stream(*this, x);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double t = stream.next();
        sum += (k % 2 == 0) ? t : -t;
    }
    return sum;
}

namespace {

// Alternating-series acceleration (Cohen, Rodriguez-Villegas, Zagier,
// "Convergence acceleration of alternating series", Exp. Math. 9 (2000)).
// For moment sequences a_k the error decays like (3+sqrt(8))^-n.
template <typename TermFn>
double cvz_accelerated_sum(std::size_t n, TermFn&& term, double* abs_scale) {
    const double base = 3.0 + std::sqrt(8.0);
    double d = std::pow(base, static_cast<double>(n));
    d = (d + 1.0 / d) / 2.0;
    double b = -1.0;
    double c = -d;
    double s = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        c = b - c;
        double a = term(k);
        s += c * a;
        scale += std::fabs(c * a);
        double kk = static_cast<double>(k);
        double nn = static_cast<double>(n);
        b *= (kk + nn) * (kk - nn) / ((kk + 0.5) * (kk + 1.0));
    }
    if (abs_scale) *abs_scale = scale / d;
    return s / d;
}

} // namespace

DensityValue SeriesDensity::eval(double x, const TruncationPolicy& policy) const {
    DensityValue out;
    out.method = "plain";
    TermStream stream(*this, x);
    std::deque<double> window;
    double sum = 0.0;
    double comp = 0.0; // Kahan correction
    bool monotone = true;
    std::size_t k = 0;
    double omitted = 0.0;
    bool early = false;
    for (; k < policy.max_terms; ++k) {
        double t = stream.next();
        if (!window.empty() && t > window.back() + 1e-300) monotone = false;
        window.push_back(t);
        if (window.size() > 10) window.pop_front();
        if (t <= policy.tail_tolerance && k >= 2) {
            omitted = t;
            early = true;
            break;
        }
        double signed_term = (k % 2 == 0) ? t : -t;
        double y = signed_term - comp;
        double total = sum + y;
        comp = (total - sum) - y;
        sum = total;
    }
    if (!early) omitted = stream.next();
    out.value = sum;
    out.tail_bound = omitted;
    out.tail_verified = monotone;
    out.terms_used = k;
    if (early || omitted <= policy.tail_tolerance) return out;

    if (stride_ == 2 && monotone) {
        // slowly decaying single alternating series: accelerate
        std::size_t n = std::min<std::size_t>(policy.max_terms, 250);
        TermStream accel(*this, x);
        double scale = 0.0;
        double value = cvz_accelerated_sum(n, [&](std::size_t) { return accel.next(); }, &scale);
        TermStream head(*this, x);
        double a0 = head.next();
        double apriori = 4.0 * a0 * std::pow(3.0 + std::sqrt(8.0), -static_cast<double>(n));
        double rounding = 8.0 * std::numeric_limits<double>::epsilon() * scale;
        out.value = value;
        out.tail_bound = apriori + rounding;
        out.tail_verified = true;
        out.terms_used = n;
        out.method = "accelerated";
    }
    return out;
}

std::string SeriesDensity::str() const {
    std::string out = "sum_(k>=0) (-1)^k h(V^(e_k) x) |w^(e_k)(x)|";
    out += ", e_k = (k div 2)*" + std::to_string(stride_) + " + (k mod 2)";
    out += "; h(x) = " + base_.str();
    out += "; V(x) = " + jump_.str();
    return out;
}

QuadExt Density::eval_exact(const QuadExt& x) const {
    if (!closed_form())
        throw Error(Errc::unsupported, "exact evaluation needs a closed-form density");
    return as_closed().eval_exact(x);
}

DensityValue Density::eval(double x, const TruncationPolicy& policy) const {
    if (closed_form()) {
        DensityValue out;
        out.value = as_closed().eval_double(x);
        out.tail_bound = 0.0;
        out.method = "closed";
        return out;
    }
    return as_series().eval(x, policy);
}

std::string Density::str() const {
    return closed_form() ? as_closed().str() : as_series().str();
}

LinearFactorDensity dual_interval_density(const QuadExt& p, const QuadExt& q) {
    if (p == q)
        throw Error(Errc::degenerate_interval, "dual interval is a point; use point_dual_density");
    if (p > q) return dual_interval_density(q, p);
    for (const QuadExt* end : {&p, &q})
        if (*end < QuadExt(-1))
            throw Error(Errc::pole_inside_domain,
                        "1 + (" + end->str() + ")x vanishes inside (0,1)");
    return LinearFactorDensity::one_over({{QuadExt(1), p}, {QuadExt(1), q}}, q - p);
}

LinearFactorDensity point_dual_density(const ProjectiveScalar& xi) {
    if (xi.is_infinity())
        return LinearFactorDensity::one_over({{QuadExt(0), QuadExt(1)}, {QuadExt(0), QuadExt(1)}});
    const QuadExt& v = xi.finite();
    if (v < QuadExt(-1))
        throw Error(Errc::pole_inside_domain, "1 + (" + v.str() + ")x vanishes inside (0,1)");
    return LinearFactorDensity::one_over({{QuadExt(1), v}, {QuadExt(1), v}});
}

} // namespace pfl
