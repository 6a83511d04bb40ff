#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pfl/moebius.hpp"
#include "pfl/scalar.hpp"

namespace pfl {

struct TruncationPolicy {
    std::size_t max_terms = 1000;
    double tail_tolerance = 1e-10;
};

/// Value of a (possibly truncated) density evaluation. tail_bound is the
/// magnitude of the first omitted term for plain summation, or the a-priori
/// acceleration bound; tail_verified states whether the bound is backed by a
/// monotone tail window.
struct DensityValue {
    double value = 0.0;
    double tail_bound = 0.0;
    bool tail_verified = true;
    std::size_t terms_used = 0;
    const char* method = "closed";
};

/// denominator factor p + q*x
struct LinearFactor {
    QuadExt p;
    QuadExt q;
};

/// constant / prod_i (p_i + q_i x)
struct LinearFactorTerm {
    QuadExt constant;
    std::vector<LinearFactor> factors;
};

/// Signed sum of linear-factor terms. Covers the closed-form densities: the
/// two-branch h, the dual point/interval densities, and telescoped series.
class LinearFactorDensity {
public:
    LinearFactorDensity() = default;
    explicit LinearFactorDensity(std::vector<LinearFactorTerm> terms);

    static LinearFactorDensity one_over(std::vector<LinearFactor> factors, QuadExt constant = QuadExt(1));

    const std::vector<LinearFactorTerm>& terms() const { return terms_; }

    QuadExt eval_exact(const QuadExt& x) const;
    double eval_double(double x) const;

    /// h(V x) * |omega(x)| as a new closed form. Each term needs at most two
    /// factors (one-factor terms pick up the branch denominator).
    LinearFactorDensity pullback(const MoebiusBranch& v) const;

    LinearFactorDensity operator-() const;
    friend LinearFactorDensity operator+(const LinearFactorDensity& f, const LinearFactorDensity& g);
    friend LinearFactorDensity operator-(const LinearFactorDensity& f, const LinearFactorDensity& g);

    std::string str() const;

private:
    std::vector<LinearFactorTerm> terms_;
};

/// Series density sum_k (-1)^k h(V^{e_k} x) |w^{e_k}(x)| with the exponent
/// pattern e_{2j} = j*stride, e_{2j+1} = j*stride + 1. stride = 2^n is the
/// pattern of the n-step jump extension; stride 2 is the plain alternating
/// series of the 1-step extension.
class SeriesDensity {
public:
    SeriesDensity(LinearFactorDensity base, MoebiusBranch jump, std::uint64_t stride = 2);

    const LinearFactorDensity& base() const { return base_; }
    const MoebiusBranch& jump() const { return jump_; }
    std::uint64_t stride() const { return stride_; }

    std::uint64_t exponent(std::size_t k) const { return (k / 2) * stride_ + (k % 2); }
    int term_sign(std::size_t k) const { return k % 2 == 0 ? +1 : -1; }

    /// Exact value of term k (without sign) at rational/surd x.
    QuadExt term_exact(std::size_t k, const QuadExt& x) const;

    /// Exact partial sum of the first n terms.
    QuadExt partial_sum_exact(std::size_t n, const QuadExt& x) const;

    /// Plain alternating partial sum of exactly n terms, in doubles.
    double partial_sum_double(std::size_t n, double x) const;

    /// Truncation-policy evaluation: plain summation with first-omitted-term
    /// tail bound; when the plain tail cannot meet the tolerance and the
    /// pattern is a single alternating series (stride 2), falls back to
    /// alternating-series acceleration (Cohen-Rodriguez-Villegas-Zagier).
    DensityValue eval(double x, const TruncationPolicy& policy) const;

    std::string str() const;

private:
    struct TermStream; // incremental double-precision term generator

    LinearFactorDensity base_;
    MoebiusBranch jump_;
    std::uint64_t stride_;
    MoebiusBranch jump_step_; // V^{stride-1}, the gap between odd and even slots
};

class Density {
public:
    Density() : impl_(LinearFactorDensity()) {}
    Density(LinearFactorDensity d) : impl_(std::move(d)) {} // NOLINT: implicit by design
    Density(SeriesDensity d) : impl_(std::move(d)) {}       // NOLINT

    bool closed_form() const { return std::holds_alternative<LinearFactorDensity>(impl_); }
    const LinearFactorDensity& as_closed() const { return std::get<LinearFactorDensity>(impl_); }
    const SeriesDensity& as_series() const { return std::get<SeriesDensity>(impl_); }

    QuadExt eval_exact(const QuadExt& x) const; // closed forms only
    DensityValue eval(double x, const TruncationPolicy& policy) const;

    std::string str() const;

private:
    std::variant<LinearFactorDensity, SeriesDensity> impl_;
};

/// Density of the dual acting on B* = [p, q]: integral of dy/(1+xy)^2 over
/// [p, q], which closes to (q - p)/((1 + p x)(1 + q x)).
LinearFactorDensity dual_interval_density(const QuadExt& p, const QuadExt& q);

/// Density when B* shrinks to the point xi: 1/(1 + xi x)^2; 1/x^2 for xi = inf.
LinearFactorDensity point_dual_density(const ProjectiveScalar& xi);

} // namespace pfl
