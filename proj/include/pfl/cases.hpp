#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pfl/density.hpp"
#include "pfl/extensions.hpp"
#include "pfl/interval_map.hpp"

namespace pfl {

enum class Family { PPP, PMM, MPP };

Family parse_family(const std::string& name);
std::string family_name(Family family);

/// Three-branch family parameters. PPP lives on 0 < 1/2 < 2/3 < 1 with
/// increasing branches; PMM and MPP live on 0 < 1/3 < 1/2 < 1.
struct CaseParams {
    Family family = Family::PPP;
    Rational lambda;
    Rational mu;
    Rational nu;
};

PiecewiseMoebiusMap build_map(const CaseParams& params);
std::vector<MoebiusBranch> dual_map(const CaseParams& params);

struct CaseFixedPoints {
    ProjectiveScalar xi;
    std::vector<QuadExt> eta_candidates;
    std::optional<QuadExt> theta; // PPP: greater fixed point of V*_mu
};

CaseFixedPoints case_fixed_points(const CaseParams& params);

struct ConditionResult {
    std::string name;
    bool holds = false;
    std::string lhs;
    std::string rhs;
};

/// The dual-configuration conditions of the theorems plus their derived
/// algebraic equivalents, each decided exactly with rendered witnesses.
std::vector<ConditionResult> check_conditions(const CaseParams& params);

enum class Outcome { point_dual, one_step_extension, exceptional_dual, no_condition_met };
std::string outcome_name(Outcome outcome);

/// Conjugacy candidate psi(t) = (2L-1 + (LM + M - 4L + 1)t)/(1 - L + (2L-1)t);
/// degenerate (zero determinant) exactly when mu - lambda = lambda^2 mu, in
/// which case psi is the constant xi.
struct PsiResult {
    std::array<QuadExt, 4> coeffs; // a, b, c, d in the usual layout
    bool degenerate = false;
    std::optional<QuadExt> constant;
    std::optional<MoebiusBranch> branch; // absent when degenerate
    std::string str() const;
};

PsiResult psi_map(const Rational& lambda, const Rational& mu);

/// Matrix check of psi o V == V* o psi up to scale. Throws for degenerate psi
/// (the conjugacy collapses to the constant fixed point and is reported
/// separately by classify).
bool verify_conjugacy(const PsiResult& psi, const MoebiusBranch& v, const MoebiusBranch& v_star);

struct ClassificationReport {
    CaseParams params;
    TypeSignature type;
    CaseFixedPoints fixed_points;
    std::vector<ConditionResult> conditions;
    std::vector<std::string> satisfied_relations;
    Outcome outcome = Outcome::no_condition_met;
    bool natural_dual_degenerate = false;    // Theorems 1-2: psi(0) = psi(1), dual shrank to a point
    bool exceptional_point_degenerate = false; // MPP: B* endpoints coincide
    bool one_step_extension_flag = false;      // MPP advisory flag (mu = 1)
    std::optional<ProjectiveScalar> xi_point;
    std::optional<std::pair<QuadExt, QuadExt>> dual_interval; // sorted endpoints of B*
    std::optional<PsiResult> psi;
    std::optional<Density> density;
    std::optional<ResidualReport> certificate;
};

/// Applies the theorem dichotomies for the family of `params` and attaches an
/// invariance-residual certificate for the claimed density.
ClassificationReport classify(const CaseParams& params, const TruncationPolicy& policy = {},
                              std::size_t grid_points = 101);

/// Checks iterate(V_alpha, n) against the Fibonacci form
/// (F_{n-1} - F_{n-3} x)/(F_{n+1} - F_{n-1} x) for all n <= n_max.
bool fibonacci_iterate_check(unsigned n_max);

/// Fibonacci numbers with start values F_{-2} = 1, F_{-1} = 0 (n >= -3).
Integer fibonacci(long n);

} // namespace pfl
