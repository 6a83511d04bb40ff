#pragma once

#include <string>

#include "pfl/density.hpp"
#include "pfl/interval_map.hpp"

namespace pfl {

/// Two-branch base map together with its known invariant density and the
/// label of the branch the jump construction composes over.
struct BaseSystem {
    PiecewiseMoebiusMap map;
    LinearFactorDensity density; // h
    std::string jump_label;
};

/// The three two-branch bases on the partition 0 < 1/2 < 1 whose one-step
/// extensions populate the parameterized families.
BaseSystem ppp2_base(const Rational& lambda); // {V_lambda, V_beta = 1/(2-x)}, jump beta
BaseSystem pmm2_base(const Rational& nu);     // {V_alpha = x/(1+x), V_nu}, jump alpha
BaseSystem mpp2_base(const Rational& nu);     // {V_alpha = (1-x)/(2-x), V_nu}, jump alpha

/// Exact-scale closed form of the mpp2 one-step density: the alternating
/// series telescopes into two linear-factor terms over Q(sqrt 5).
LinearFactorDensity mpp2_closed_density(const Rational& nu);

struct ExtensionResult {
    PiecewiseMoebiusMap map;
    Density density;
    std::string base_label_kept;
    std::string label_jumped;
    unsigned steps = 0;
};

/// One-step extension: branches {V_kept} union {V_jump o W : W a base branch},
/// partition recomputed from branch images; the density is the unrolled
/// recurrence g = h - g(V_jump x)|w_jump(x)| as a series.
ExtensionResult jump_extension(const BaseSystem& base);

/// Iterated construction; each step jumps over the deepest branch, giving
/// 2^n + 1 branches and the series density with exponent stride 2^n.
ExtensionResult n_step_extension(const BaseSystem& base, unsigned steps);

/// Limit density g_inf = h(V_kept x)|w_kept(x)| = h(x) - h(V_jump x)|w_jump(x)|.
/// Both forms are computed and their pointwise equality asserted on a grid.
LinearFactorDensity g_infinity(const BaseSystem& base);

/// Residuals of the jump identity h(x) = g(x) + g(V_jump x)|w_jump(x)| on the
/// grid. Exact zero for closed-form g, bounded by the truncation for series.
ResidualReport verify_lemma1(const BaseSystem& base, const Density& g,
                             const std::vector<QuadExt>& grid, const TruncationPolicy& policy);

} // namespace pfl
