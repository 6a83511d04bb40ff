#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pfl/density.hpp"
#include "pfl/moebius.hpp"
#include "pfl/scalar.hpp"

namespace pfl {

/// Piecewise Moebius map on [0,1], stored through its inverse branches:
/// branch k maps [0,1] onto the cylinder [a_{k-1}, a_k]. The forward map T
/// applies the matrix inverse of the branch covering x. Cylinders are
/// half-open [a_{k-1}, a_k), the last one closed.
struct PiecewiseMoebiusMap {
    std::vector<QuadExt> partition;      // a_0 = 0 < a_1 < ... < a_m = 1
    std::vector<MoebiusBranch> branches; // inverse branches V_1..V_m
    std::vector<std::string> labels;

    std::size_t size() const { return branches.size(); }
};

struct BranchCheck {
    std::size_t index = 0;
    std::string label;
    bool endpoints_ok = false;
    bool pole_free = false;
    std::string message;
    bool ok() const { return endpoints_ok && pole_free; }
};

struct ValidationReport {
    bool valid = false;
    std::string structure_error; // partition/shape problems, empty when fine
    std::vector<BranchCheck> checks;
};

/// Exact validation: each branch sends {0,1} onto its cylinder endpoints and
/// has no pole in [0,1]. Returns a report instead of throwing.
ValidationReport validate(const PiecewiseMoebiusMap& map);

/// epsilon_k = sign det V_k; rendered as "(+,-,...)".
using TypeSignature = std::vector<int>;
TypeSignature classify_type(const PiecewiseMoebiusMap& map);
std::string type_signature_str(const TypeSignature& sig);

struct ForwardStep {
    QuadExt value;
    std::size_t branch; // 0-based
};

/// One forward step T(x) with the branch index used.
ForwardStep forward(const PiecewiseMoebiusMap& map, const QuadExt& x);

/// Transfer (Perron-Frobenius) operator at x for a closed-form density:
/// sum_k g(V_k x) |omega_k(x)|, exactly.
QuadExt transfer_eval_exact(const PiecewiseMoebiusMap& map, const LinearFactorDensity& g, const QuadExt& x);

/// Same in doubles for any density; bound accumulates the per-evaluation tail
/// bounds weighted by |omega_k|.
struct TransferValue {
    double value = 0.0;
    double bound = 0.0;
};
TransferValue transfer_eval(const PiecewiseMoebiusMap& map, const Density& g, double x,
                            const TruncationPolicy& policy);

struct ResidualEntry {
    QuadExt x;
    double residual = 0.0;
    double bound = 0.0; // certified bound on the truncation part of the residual
    bool skipped = false;
    std::string reason;
};

struct ResidualReport {
    std::vector<ResidualEntry> entries;
    double max_residual = 0.0;
    double max_bound = 0.0;
    bool exact = false;      // evaluated in exact arithmetic
    bool exact_zero = false; // every residual identically zero
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

std::vector<QuadExt> default_grid(std::size_t points = 101);

/// Max relative invariance residual |Lg - g| / |g| over the grid. Closed-form
/// densities are checked exactly; series densities in doubles with certified
/// truncation bounds. Pole-hitting grid points are skipped and reported.
ResidualReport invariance_residual(const PiecewiseMoebiusMap& map, const Density& g,
                                   const std::vector<QuadExt>& grid, const TruncationPolicy& policy);

struct Histogram {
    std::vector<double> mass; // normalized to total 1 (all zero when empty)
    std::size_t iterations = 0;
    std::size_t burn_in = 0;
};

/// Double-precision forward orbit of x0, clamped to [0,1]; throws OrbitEscaped
/// when the orbit drifts outside by more than the guard tolerance.
Histogram orbit_histogram(const PiecewiseMoebiusMap& map, double x0, std::size_t iterations,
                          std::size_t bins, std::size_t burn_in);

} // namespace pfl
