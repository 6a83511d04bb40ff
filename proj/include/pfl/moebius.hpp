#pragma once

#include <string>
#include <vector>

#include "pfl/scalar.hpp"

namespace pfl {

/// Moebius transformation stored as a 2x2 matrix
///
///     | a  b |
///     | c  d |
///
/// acting on x as V(x) = (c + d*x)/(a + b*x).
///
/// NOTE the layout: the FIRST row holds the denominator coefficients. This is
/// the transpose of the usual (ax+b)/(cx+d) convention; it keeps the branch
/// matrices of the map families and their adjoints (b <-> c swap) literal.
/// In homogeneous coordinates (1 : x) maps to (a + b*x : c + d*x), read as
/// second over first.
class MoebiusBranch {
public:
    MoebiusBranch() : a_(1), b_(0), c_(0), d_(1) {}
    MoebiusBranch(QuadExt a, QuadExt b, QuadExt c, QuadExt d);

    static MoebiusBranch identity() { return MoebiusBranch(); }

    const QuadExt& a() const { return a_; }
    const QuadExt& b() const { return b_; }
    const QuadExt& c() const { return c_; }
    const QuadExt& d() const { return d_; }

    QuadExt det() const { return a_ * d_ - b_ * c_; }
    bool is_identity() const;

    ProjectiveScalar eval(const ProjectiveScalar& x) const;
    QuadExt eval_finite(const QuadExt& x) const; // throws PoleAtPoint on the pole

    /// omega(x) = det / (a + b x)^2, signed; absolute value when requested.
    QuadExt jacobian(const QuadExt& x, bool absolute = false) const;

    MoebiusBranch inverse() const { return MoebiusBranch(d_, -b_, -c_, a_); }
    MoebiusBranch adjoint() const { return MoebiusBranch(a_, c_, b_, d_); }

    /// Content- and sign-normalized representative (integer entries, no common
    /// factor, first nonzero entry positive).
    MoebiusBranch normalized() const;

    /// Proportionality test (same transformation).
    bool equivalent(const MoebiusBranch& other) const;

    std::string str(const std::string& var = "x") const;

private:
    QuadExt a_, b_, c_, d_;
};

/// Matrix product under the convention above: eval(compose(V1,V2), x) equals
/// eval(V1, eval(V2, x)). Result is normalized.
MoebiusBranch compose(const MoebiusBranch& v1, const MoebiusBranch& v2);

/// n-fold self-composition by binary exponentiation; n = 0 gives the identity.
MoebiusBranch iterate(const MoebiusBranch& v, unsigned long n);

struct FixedPoints {
    std::vector<ProjectiveScalar> points;
    bool double_root = false;
};

/// Exact fixed points: solutions of b y^2 + (a - d) y - c = 0, including the
/// point at infinity when b = 0. Throws IdentityMap for the identity,
/// NegativeDiscriminant for complex fixed points, and Unsupported when the
/// discriminant is not rational (would leave the Q(sqrt d) tower).
FixedPoints fixed_points(const MoebiusBranch& v);

/// Formats p + q*x with the usual cleanups for 0 and +-1 coefficients.
std::string linear_str(const QuadExt& p, const QuadExt& q, const std::string& var);

} // namespace pfl
