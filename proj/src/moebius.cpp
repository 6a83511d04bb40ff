#include "pfl/moebius.hpp"

#include <array>

namespace pfl {

MoebiusBranch::MoebiusBranch(QuadExt a, QuadExt b, QuadExt c, QuadExt d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    if (det().is_zero())
        throw Error(Errc::unsupported, "singular Moebius matrix: det = 0");
}

bool MoebiusBranch::is_identity() const {
    return b_.is_zero() && c_.is_zero() && a_ == d_;
}

ProjectiveScalar MoebiusBranch::eval(const ProjectiveScalar& x) const {
    if (x.is_infinity()) {
        if (b_.is_zero()) return ProjectiveScalar::infinity();
        return ProjectiveScalar(d_ / b_);
    }
    const QuadExt& v = x.finite();
    QuadExt den = a_ + b_ * v;
    if (den.is_zero()) return ProjectiveScalar::infinity();
    return ProjectiveScalar((c_ + d_ * v) / den);
}

QuadExt MoebiusBranch::eval_finite(const QuadExt& x) const {
    QuadExt den = a_ + b_ * x;
    if (den.is_zero())
        throw Error(Errc::pole_at_point, "pole of " + str() + " at x = " + x.str());
    return (c_ + d_ * x) / den;
}

QuadExt MoebiusBranch::jacobian(const QuadExt& x, bool absolute) const {
    QuadExt den = a_ + b_ * x;
    if (den.is_zero())
        throw Error(Errc::pole_at_point, "jacobian pole of " + str() + " at x = " + x.str());
    QuadExt omega = det() / (den * den);
    return absolute ? abs(omega) : omega;
}

MoebiusBranch MoebiusBranch::normalized() const {
    std::array<QuadExt, 4> entries = {a_, b_, c_, d_};
    // rational content over all 8 components
    Integer num_gcd = 0;
    Integer den_lcm = 1;
    for (const QuadExt& e : entries) {
        for (const Rational* part : {&e.rational_part(), &e.surd_part()}) {
            if (sgn(*part) == 0) continue;
            Integer num = part->get_num();
            mpz_abs(num.get_mpz_t(), num.get_mpz_t());
            mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), num.get_mpz_t());
            mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), part->get_den().get_mpz_t());
        }
    }
    if (sgn(num_gcd) == 0) return *this; // unreachable: det != 0
    QuadExt scale = QuadExt(make_rational(den_lcm, num_gcd));
    int lead = 0;
    for (const QuadExt& e : entries) {
        if (!e.is_zero()) {
            lead = e.sign();
            break;
        }
    }
    if (lead < 0) scale = -scale;
    return MoebiusBranch(a_ * scale, b_ * scale, c_ * scale, d_ * scale);
}

bool MoebiusBranch::equivalent(const MoebiusBranch& other) const {
    MoebiusBranch lhs = normalized();
    MoebiusBranch rhs = other.normalized();
    return lhs.a() == rhs.a() && lhs.b() == rhs.b() && lhs.c() == rhs.c() && lhs.d() == rhs.d();
}

MoebiusBranch compose(const MoebiusBranch& v1, const MoebiusBranch& v2) {
    // plain matrix product M1 * M2
    QuadExt a = v1.a() * v2.a() + v1.b() * v2.c();
    QuadExt b = v1.a() * v2.b() + v1.b() * v2.d();
    QuadExt c = v1.c() * v2.a() + v1.d() * v2.c();
    QuadExt d = v1.c() * v2.b() + v1.d() * v2.d();
    return MoebiusBranch(std::move(a), std::move(b), std::move(c), std::move(d)).normalized();
}

MoebiusBranch iterate(const MoebiusBranch& v, unsigned long n) {
    MoebiusBranch result = MoebiusBranch::identity();
    MoebiusBranch power = v;
    while (n > 0) {
        if (n & 1UL) result = compose(result, power);
        n >>= 1UL;
        if (n > 0) power = compose(power, power);
    }
    return result.normalized();
}

FixedPoints fixed_points(const MoebiusBranch& v) {
    if (v.is_identity()) throw Error(Errc::identity_map, "every point is fixed by the identity");
    FixedPoints out;
    QuadExt b = v.b();
    QuadExt trace_gap = v.a() - v.d();
    QuadExt c = v.c();
    if (b.is_zero()) {
        // linear map; infinity is always fixed
        if (trace_gap.is_zero()) {
            // translation: only infinity, doubly so
            out.points.push_back(ProjectiveScalar::infinity());
            out.double_root = true;
            return out;
        }
        out.points.push_back(ProjectiveScalar(c / trace_gap));
        out.points.push_back(ProjectiveScalar::infinity());
        return out;
    }
    QuadExt disc = trace_gap * trace_gap + QuadExt(4) * b * c;
    if (!disc.is_rational())
        throw Error(Errc::unsupported, "fixed-point discriminant leaves Q(sqrt d): " + disc.str());
    int s = disc.sign();
    if (s < 0)
        throw Error(Errc::negative_discriminant,
                    "complex fixed points, discriminant " + disc.str());
    QuadExt two_b = QuadExt(2) * b;
    if (s == 0) {
        out.points.push_back(ProjectiveScalar(-trace_gap / two_b));
        out.double_root = true;
        return out;
    }
    QuadExt root = sqrt_adjoin(disc.rational_part());
    out.points.push_back(ProjectiveScalar((-trace_gap + root) / two_b));
    out.points.push_back(ProjectiveScalar((-trace_gap - root) / two_b));
    return out;
}

std::string linear_str(const QuadExt& p, const QuadExt& q, const std::string& var) {
    bool surdish = !p.is_rational() || !q.is_rational();
    auto wrap = [&](const QuadExt& v) {
        std::string s = v.str();
        if (s.find(' ') != std::string::npos || s.find('/') != std::string::npos) return "(" + s + ")";
        return s;
    };
    if (q.is_zero()) return p.str();
    std::string qpart;
    if (q == QuadExt(1))
        qpart = var;
    else if (q == QuadExt(-1))
        qpart = "-" + var;
    else
        qpart = wrap(q) + "*" + var;
    if (p.is_zero()) return qpart;
    if (!surdish && q.sign() < 0) {
        QuadExt nq = -q;
        std::string tail = nq == QuadExt(1) ? var : wrap(nq) + "*" + var;
        return p.str() + " - " + tail;
    }
    return p.str() + " + " + qpart;
}

std::string MoebiusBranch::str(const std::string& var) const {
    std::string num = linear_str(c_, d_, var);
    std::string den = linear_str(a_, b_, var);
    if (den == "1") return num;
    if (num.find(' ') != std::string::npos) num = "(" + num + ")";
    if (den.find(' ') != std::string::npos || den == var)
        den = "(" + den + ")";
    else if (den.find('*') != std::string::npos || den.find('/') != std::string::npos)
        den = "(" + den + ")";
    return num + "/" + den;
}

} // namespace pfl
