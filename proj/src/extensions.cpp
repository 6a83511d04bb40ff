#include "pfl/extensions.hpp"

#include <algorithm>
#include <cmath>

namespace pfl {

namespace {

Rational half() { return make_rational(1, 2); }

void require_positive(const Rational& value, const char* name) {
    if (sgn(value) <= 0)
        throw Error(Errc::parameter_out_of_range, std::string(name) + " must be positive");
}

PiecewiseMoebiusMap two_branch_map(MoebiusBranch first, MoebiusBranch second, std::string label1,
                                   std::string label2) {
    PiecewiseMoebiusMap map;
    map.partition = {QuadExt(0), QuadExt(half()), QuadExt(1)};
    map.branches = {std::move(first), std::move(second)};
    map.labels = {std::move(label1), std::move(label2)};
    return map;
}

} // namespace

BaseSystem ppp2_base(const Rational& lambda) {
    require_positive(lambda, "lambda");
    if (lambda > 1) throw Error(Errc::parameter_out_of_range, "ppp2 needs lambda <= 1");
    QuadExt L(lambda);
    MoebiusBranch v_lambda(QuadExt(1), QuadExt(2) * L - QuadExt(1), QuadExt(0), L);
    MoebiusBranch v_beta(QuadExt(2), QuadExt(-1), QuadExt(1), QuadExt(0)); // 1/(2-x)
    // h(x) = 1/((1 - lambda + (2 lambda - 1)x)(1 - x))
    LinearFactorDensity h = LinearFactorDensity::one_over(
        {{QuadExt(1) - L, QuadExt(2) * L - QuadExt(1)}, {QuadExt(1), QuadExt(-1)}});
    return {two_branch_map(std::move(v_lambda), std::move(v_beta), "λ", "β"), std::move(h), "β"};
}

BaseSystem pmm2_base(const Rational& nu) {
    require_positive(nu, "nu");
    QuadExt N(nu);
    MoebiusBranch v_alpha(QuadExt(1), QuadExt(1), QuadExt(0), QuadExt(1)); // x/(1+x)
    MoebiusBranch v_nu(QuadExt(1), QuadExt(2) * N - QuadExt(1), QuadExt(1), N - QuadExt(1));
    // h(x) = 1/(x (1 + (nu - 1)x))
    LinearFactorDensity h = LinearFactorDensity::one_over(
        {{QuadExt(0), QuadExt(1)}, {QuadExt(1), N - QuadExt(1)}});
    return {two_branch_map(std::move(v_alpha), std::move(v_nu), "α", "ν"), std::move(h), "α"};
}

BaseSystem mpp2_base(const Rational& nu) {
    require_positive(nu, "nu");
    QuadExt N(nu);
    MoebiusBranch v_alpha(QuadExt(2), QuadExt(-1), QuadExt(1), QuadExt(-1)); // (1-x)/(2-x)
    MoebiusBranch v_nu(QuadExt(2), N - QuadExt(2), QuadExt(1), N - QuadExt(1));
    // h(x) = 1/((1 + (nu - 2)x)(nu + (1 - nu)x))
    LinearFactorDensity h = LinearFactorDensity::one_over(
        {{QuadExt(1), N - QuadExt(2)}, {N, QuadExt(1) - N}});
    return {two_branch_map(std::move(v_alpha), std::move(v_nu), "α", "ν"), std::move(h), "α"};
}

LinearFactorDensity mpp2_closed_density(const Rational& nu) {
    require_positive(nu, "nu");
    // Telescoped limit of the alternating series over the Fibonacci-type
    // denominators P_0 = 1 + (nu-2)x, P_1 = nu - (nu-1)x, P_{n+1} = P_n + P_{n-1}:
    //   g(x) = (sigma*B + A)/(sigma*P_1(x) + P_0(x)) - A/P_0(x)
    // with A = (2-nu)/(nu^2-nu-1), B = (nu-1)/(nu^2-nu-1), sigma = (1+sqrt 5)/2.
    QuadExt N(nu);
    QuadExt disc = N * N - N - QuadExt(1); // never 0 for rational nu
    if (disc.is_zero()) throw Error(Errc::unsupported, "nu solves nu^2 = nu + 1");
    QuadExt A = (QuadExt(2) - N) / disc;
    QuadExt B = (N - QuadExt(1)) / disc;
    QuadExt sigma = (QuadExt(1) + sqrt_adjoin(Rational(5))) / QuadExt(2);
    LinearFactor p0{QuadExt(1), N - QuadExt(2)};
    LinearFactor tail{sigma * N + QuadExt(1), N - QuadExt(2) - sigma * (N - QuadExt(1))};
    std::vector<LinearFactorTerm> terms;
    terms.push_back({sigma * B + A, {tail}});
    if (!A.is_zero()) terms.push_back({-A, {p0}});
    return LinearFactorDensity(std::move(terms));
}

namespace {

struct Provenance {
    MoebiusBranch branch;
    std::uint64_t jump_power = 0;
    bool has_kept = false;
    std::string base_label; // label of the trailing base branch when has_kept
};

std::string provenance_label(const Provenance& p, const std::string& jump_label) {
    if (p.jump_power == 0) return p.base_label;
    std::string power = jump_label;
    if (p.jump_power > 1) power += "^" + std::to_string(p.jump_power);
    if (!p.has_kept) return power;
    return power + "∘" + p.base_label;
}

PiecewiseMoebiusMap assemble_map(std::vector<Provenance> pieces, const std::string& jump_label) {
    struct Piece {
        QuadExt lo, hi;
        Provenance prov;
    };
    std::vector<Piece> spans;
    for (auto& p : pieces) {
        QuadExt at0 = p.branch.eval_finite(QuadExt(0));
        QuadExt at1 = p.branch.eval_finite(QuadExt(1));
        if (at0 < at1)
            spans.push_back({std::move(at0), std::move(at1), std::move(p)});
        else
            spans.push_back({std::move(at1), std::move(at0), std::move(p)});
    }
    std::sort(spans.begin(), spans.end(), [](const Piece& x, const Piece& y) { return x.lo < y.lo; });
    PiecewiseMoebiusMap map;
    map.partition.push_back(QuadExt(0));
    for (std::size_t k = 0; k < spans.size(); ++k) {
        if (!(spans[k].lo == map.partition.back()))
            throw Error(Errc::invalid_base, "branch images do not tile [0,1]");
        map.partition.push_back(spans[k].hi);
        map.branches.push_back(spans[k].prov.branch);
        map.labels.push_back(provenance_label(spans[k].prov, jump_label));
    }
    if (!(map.partition.back() == QuadExt(1)))
        throw Error(Errc::invalid_base, "branch images do not reach 1");
    return map;
}

std::size_t base_jump_index(const BaseSystem& base) {
    if (base.map.size() != 2)
        throw Error(Errc::invalid_base, "jump construction needs a two-branch base");
    ValidationReport check = validate(base.map);
    if (!check.valid) throw Error(Errc::invalid_base, "base map does not validate");
    for (std::size_t k = 0; k < base.map.labels.size(); ++k)
        if (base.map.labels[k] == base.jump_label) return k;
    throw Error(Errc::invalid_base, "jump label not found in base map");
}

} // namespace

ExtensionResult jump_extension(const BaseSystem& base) {
    return n_step_extension(base, 1);
}

ExtensionResult n_step_extension(const BaseSystem& base, unsigned steps) {
    if (steps == 0 || steps > 24)
        throw Error(Errc::invalid_base, "step count must be between 1 and 24");
    std::size_t jump_index = base_jump_index(base);
    MoebiusBranch jump = base.map.branches[jump_index];
    std::string kept_label = base.map.labels[1 - jump_index];

    std::vector<Provenance> pieces;
    pieces.push_back({base.map.branches[1 - jump_index], 0, true, kept_label});
    pieces.push_back({jump, 1, false, ""});

    // Each step jumps over the deepest branch, the pure power V_jump^(2^(i-1)):
    // drop it, and prepend that power to every branch of the current map.
    MoebiusBranch deepest = jump;
    std::uint64_t deepest_power = 1;
    for (unsigned step = 0; step < steps; ++step) {
        std::vector<Provenance> next;
        for (const auto& p : pieces) {
            bool is_deepest = !p.has_kept && p.jump_power == deepest_power;
            if (!is_deepest) next.push_back(p);
            next.push_back(
                {compose(deepest, p.branch), p.jump_power + deepest_power, p.has_kept, p.base_label});
        }
        pieces = std::move(next);
        deepest = compose(deepest, deepest);
        deepest_power *= 2;
    }

    ExtensionResult out;
    out.map = assemble_map(std::move(pieces), base.jump_label);
    out.density = Density(SeriesDensity(base.density, jump, std::uint64_t(1) << steps));
    out.base_label_kept = kept_label;
    out.label_jumped = base.jump_label;
    out.steps = steps;
    ValidationReport check = validate(out.map);
    if (!check.valid) throw Error(Errc::invalid_base, "constructed extension does not validate");
    return out;
}

LinearFactorDensity g_infinity(const BaseSystem& base) {
    std::size_t jump_index = base_jump_index(base);
    const MoebiusBranch& jump = base.map.branches[jump_index];
    const MoebiusBranch& kept = base.map.branches[1 - jump_index];
    LinearFactorDensity via_kept = base.density.pullback(kept);
    LinearFactorDensity via_jump = base.density - base.density.pullback(jump);
    std::size_t checked = 0;
    for (const QuadExt& x : default_grid(51)) {
        try {
            if (!(via_kept.eval_exact(x) == via_jump.eval_exact(x)))
                throw Error(Errc::unsupported,
                            "g_infinity forms disagree at x = " + x.str());
            ++checked;
        } catch (const Error& e) {
            if (e.code() != Errc::pole_at_point) throw;
        }
    }
    if (checked < 10) throw Error(Errc::unsupported, "g_infinity equality check starved by poles");
    return via_kept;
}

ResidualReport verify_lemma1(const BaseSystem& base, const Density& g,
                             const std::vector<QuadExt>& grid, const TruncationPolicy& policy) {
    std::size_t jump_index = base_jump_index(base);
    const MoebiusBranch& jump = base.map.branches[jump_index];
    ResidualReport report;
    report.exact = g.closed_form();
    bool all_zero = true;
    for (const QuadExt& x : grid) {
        ResidualEntry entry;
        entry.x = x;
        try {
            if (g.closed_form()) {
                QuadExt h = base.density.eval_exact(x);
                if (h.is_zero()) throw Error(Errc::pole_at_point, "h vanishes at grid point");
                QuadExt rhs = g.eval_exact(x) +
                              g.eval_exact(jump.eval_finite(x)) * jump.jacobian(x, true);
                QuadExt res = (h - rhs) / h;
                if (res.sign() != 0) all_zero = false;
                entry.residual = std::fabs(res.to_double());
            } else {
                double xd = x.to_double();
                double h = base.density.eval_double(xd);
                DensityValue gx = g.eval(xd, policy);
                double vx = jump.eval_finite(x).to_double();
                double omega = std::fabs(jump.jacobian(x, true).to_double());
                DensityValue gv = g.eval(vx, policy);
                entry.residual = std::fabs(h - gx.value - gv.value * omega) / std::fabs(h);
                entry.bound = (gx.tail_bound + gv.tail_bound * omega) / std::fabs(h);
                all_zero = false;
            }
        } catch (const Error& e) {
            entry.skipped = true;
            entry.reason = e.what();
        }
        if (!entry.skipped) {
            report.max_residual = std::max(report.max_residual, entry.residual);
            report.max_bound = std::max(report.max_bound, entry.bound);
            ++report.evaluated;
        } else {
            ++report.skipped;
        }
        report.entries.push_back(std::move(entry));
    }
    report.exact_zero = report.exact && all_zero && report.evaluated > 0;
    return report;
}

} // namespace pfl
