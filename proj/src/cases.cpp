#include "pfl/cases.hpp"

#include <algorithm>

namespace pfl {

Family parse_family(const std::string& name) {
    if (name == "ppp" || name == "PPP") return Family::PPP;
    if (name == "pmm" || name == "PMM") return Family::PMM;
    if (name == "mpp" || name == "MPP") return Family::MPP;
    throw Error(Errc::config_error, "unknown family: " + name + " (expected ppp, pmm, or mpp)");
}

std::string family_name(Family family) {
    switch (family) {
        case Family::PPP: return "ppp";
        case Family::PMM: return "pmm";
        case Family::MPP: return "mpp";
    }
    return "?";
}

std::string outcome_name(Outcome outcome) {
    switch (outcome) {
        case Outcome::point_dual: return "point_dual";
        case Outcome::one_step_extension: return "one_step_extension";
        case Outcome::exceptional_dual: return "exceptional_dual";
        case Outcome::no_condition_met: return "no_condition_met";
    }
    return "?";
}

namespace {

void check_box(const CaseParams& p) {
    auto positive = [](const Rational& v, const char* name) {
        if (sgn(v) <= 0)
            throw Error(Errc::parameter_out_of_range, std::string(name) + " must be positive");
    };
    positive(p.lambda, "lambda");
    positive(p.mu, "mu");
    positive(p.nu, "nu");
    switch (p.family) {
        case Family::PPP:
            if (p.lambda > 1) throw Error(Errc::parameter_out_of_range, "ppp needs lambda <= 1");
            if (p.nu < 1) throw Error(Errc::parameter_out_of_range, "ppp needs nu >= 1");
            break;
        case Family::PMM:
            if (p.lambda > 1) throw Error(Errc::parameter_out_of_range, "pmm needs lambda <= 1");
            break;
        case Family::MPP:
            break; // positivity plus validation is the gate
    }
}

Rational third() { return make_rational(1, 3); }
Rational half() { return make_rational(1, 2); }
Rational two_thirds() { return make_rational(2, 3); }

} // namespace

PiecewiseMoebiusMap build_map(const CaseParams& p) {
    check_box(p);
    QuadExt L(p.lambda), M(p.mu), N(p.nu);
    PiecewiseMoebiusMap map;
    map.labels = {"λ", "μ", "ν"};
    switch (p.family) {
        case Family::PPP:
            map.partition = {QuadExt(0), QuadExt(half()), QuadExt(two_thirds()), QuadExt(1)};
            map.branches = {
                MoebiusBranch(QuadExt(1), QuadExt(2) * L - QuadExt(1), QuadExt(0), L),
                MoebiusBranch(QuadExt(2), QuadExt(3) * M - QuadExt(2), QuadExt(1), QuadExt(2) * M - QuadExt(1)),
                MoebiusBranch(QuadExt(3), N - QuadExt(3), QuadExt(2), N - QuadExt(2)),
            };
            break;
        case Family::PMM:
            map.partition = {QuadExt(0), QuadExt(third()), QuadExt(half()), QuadExt(1)};
            map.branches = {
                MoebiusBranch(QuadExt(1), QuadExt(3) * L - QuadExt(1), QuadExt(0), L),
                MoebiusBranch(QuadExt(2), QuadExt(3) * M - QuadExt(2), QuadExt(1), M - QuadExt(1)),
                MoebiusBranch(QuadExt(1), QuadExt(2) * N - QuadExt(1), QuadExt(1), N - QuadExt(1)),
            };
            break;
        case Family::MPP:
            map.partition = {QuadExt(0), QuadExt(third()), QuadExt(half()), QuadExt(1)};
            map.branches = {
                MoebiusBranch(QuadExt(3), L - QuadExt(3), QuadExt(1), QuadExt(-1)),
                MoebiusBranch(QuadExt(3), QuadExt(2) * M - QuadExt(3), QuadExt(1), M - QuadExt(1)),
                MoebiusBranch(QuadExt(2), N - QuadExt(2), QuadExt(1), N - QuadExt(1)),
            };
            break;
    }
    ValidationReport report = validate(map);
    if (!report.valid) {
        std::string detail = report.structure_error;
        for (const auto& check : report.checks)
            if (!check.ok()) detail += (detail.empty() ? "" : "; ") + check.message;
        throw Error(Errc::validation_failed, "family map failed validation: " + detail);
    }
    return map;
}

std::vector<MoebiusBranch> dual_map(const CaseParams& p) {
    PiecewiseMoebiusMap map = build_map(p);
    std::vector<MoebiusBranch> duals;
    duals.reserve(map.branches.size());
    for (const auto& v : map.branches) duals.push_back(v.adjoint());
    return duals;
}

CaseFixedPoints case_fixed_points(const CaseParams& p) {
    check_box(p);
    CaseFixedPoints out;
    QuadExt L(p.lambda), M(p.mu), N(p.nu);
    switch (p.family) {
        case Family::PPP: {
            out.xi = p.lambda == 1 ? ProjectiveScalar::infinity()
                                   : ProjectiveScalar((QuadExt(2) * L - QuadExt(1)) / (QuadExt(1) - L));
            out.eta_candidates = {QuadExt(-1), (N - QuadExt(3)) / QuadExt(2)};
            Rational disc = 4 * p.mu * p.mu + 1;
            out.theta = (QuadExt(2) * M - QuadExt(3) + sqrt_adjoin(disc)) / QuadExt(2);
            break;
        }
        case Family::PMM: {
            out.xi = p.lambda == 1 ? ProjectiveScalar::infinity()
                                   : ProjectiveScalar((QuadExt(3) * L - QuadExt(1)) / (QuadExt(1) - L));
            MoebiusBranch v_mu_star = build_map(p).branches[1].adjoint();
            out.eta_candidates = {v_mu_star.eval(out.xi).finite()};
            break;
        }
        case Family::MPP: {
            Rational disc = p.mu * p.mu + 4;
            out.xi = ProjectiveScalar((M - QuadExt(4) + sqrt_adjoin(disc)) / QuadExt(2));
            out.eta_candidates = {QuadExt(-1), N - QuadExt(2)};
            break;
        }
    }
    return out;
}

namespace {

ConditionResult equality_condition(std::string name, const ProjectiveScalar& lhs,
                                   const ProjectiveScalar& rhs) {
    ConditionResult out;
    out.name = std::move(name);
    out.lhs = lhs.str();
    out.rhs = rhs.str();
    out.holds = lhs == rhs;
    return out;
}

ConditionResult rational_relation(std::string name, const Rational& lhs, const Rational& rhs) {
    ConditionResult out;
    out.name = std::move(name);
    out.lhs = rational_str(lhs);
    out.rhs = rational_str(rhs);
    out.holds = lhs == rhs;
    return out;
}

} // namespace

std::vector<ConditionResult> check_conditions(const CaseParams& p) {
    PiecewiseMoebiusMap map = build_map(p);
    CaseFixedPoints fps = case_fixed_points(p);
    const Rational &L = p.lambda, &M = p.mu, &N = p.nu;
    std::vector<ConditionResult> out;
    switch (p.family) {
        case Family::PPP: {
            MoebiusBranch vl = map.branches[0].adjoint();
            MoebiusBranch vm = map.branches[1].adjoint();
            MoebiusBranch vll = compose(vl, vl);
            const char* eta_names[2] = {"eta = -1", "eta = (nu-3)/2"};
            for (int i = 0; i < 2; ++i) {
                ProjectiveScalar eta(fps.eta_candidates[i]);
                out.push_back(equality_condition(
                    std::string("V*_mu(eta) == V*_lambda(eta) at ") + eta_names[i], vm.eval(eta),
                    vl.eval(eta)));
                out.push_back(equality_condition(
                    std::string("V*_mu(xi) == V*_lambda^2(eta) at ") + eta_names[i],
                    vm.eval(fps.xi), vll.eval(eta)));
            }
            out.push_back(rational_relation("lambda == mu", L, M));
            out.push_back(rational_relation("4*mu*nu == lambda*(nu+1)^2", 4 * M * N, L * (N + 1) * (N + 1)));
            out.push_back(rational_relation("lambda^2*mu + lambda == mu", L * L * M + L, M));
            out.push_back(equality_condition("theta == xi", ProjectiveScalar(*fps.theta), fps.xi));
            break;
        }
        case Family::PMM: {
            MoebiusBranch vm = map.branches[1].adjoint();
            MoebiusBranch vn = map.branches[2].adjoint();
            MoebiusBranch vnn = compose(vn, vn);
            ProjectiveScalar eta(fps.eta_candidates[0]);
            out.push_back(equality_condition("V*_mu(xi) == V*_nu(xi)", vm.eval(fps.xi), vn.eval(fps.xi)));
            out.push_back(
                equality_condition("V*_mu(eta) == V*_nu^2(eta)", vm.eval(eta), vnn.eval(eta)));
            out.push_back(rational_relation("4mu^2 - 4munu + mu^2nu - munu^2 == nu",
                                            4 * M * M - 4 * M * N + M * M * N - M * N * N, N));
            out.push_back(rational_relation("mu == nu", M, N));
            out.push_back(rational_relation("lambda == 1", L, Rational(1)));
            out.push_back(equality_condition("eta == xi", eta, fps.xi));
            break;
        }
        case Family::MPP: {
            MoebiusBranch vl = map.branches[0].adjoint();
            MoebiusBranch vm = map.branches[1].adjoint();
            MoebiusBranch vn = map.branches[2].adjoint();
            const char* eta_names[2] = {"eta = -1", "eta = nu-2"};
            for (int i = 0; i < 2; ++i) {
                ProjectiveScalar eta(fps.eta_candidates[i]);
                out.push_back(equality_condition(
                    std::string("V*_lambda(eta) == V*_mu(eta) at ") + eta_names[i], vl.eval(eta),
                    vm.eval(eta)));
            }
            out.push_back(
                equality_condition("V*_lambda(xi) == V*_nu(xi)", vl.eval(fps.xi), vn.eval(fps.xi)));
            out.push_back(rational_relation("lambda == mu*nu", L, M * N));
            out.push_back(rational_relation("lambda == nu^2 - 1", L, N * N - 1));
            out.push_back(rational_relation("lambda == mu", L, M));
            out.push_back(rational_relation("nu == 1", N, Rational(1)));
            out.push_back(equality_condition("xi == eta at eta = nu-2",
                                             fps.xi, ProjectiveScalar(fps.eta_candidates[1])));
            break;
        }
    }
    return out;
}

std::string PsiResult::str() const {
    if (degenerate && constant) return "constant " + constant->str();
    std::string num = linear_str(coeffs[2], coeffs[3], "t");
    std::string den = linear_str(coeffs[0], coeffs[1], "t");
    return "(" + num + ")/(" + den + ")";
}

PsiResult psi_map(const Rational& lambda, const Rational& mu) {
    QuadExt L(lambda), M(mu);
    PsiResult out;
    out.coeffs = {QuadExt(1) - L, QuadExt(2) * L - QuadExt(1), QuadExt(2) * L - QuadExt(1),
                  L * M + M - QuadExt(4) * L + QuadExt(1)};
    QuadExt det = out.coeffs[0] * out.coeffs[3] - out.coeffs[1] * out.coeffs[2];
    out.degenerate = det.is_zero();
    if (out.degenerate) {
        // rows are proportional; psi collapses to c/a (a = 1-lambda != 0 here,
        // since lambda = 1 gives det = -1)
        out.constant = out.coeffs[2] / out.coeffs[0];
    } else {
        out.branch = MoebiusBranch(out.coeffs[0], out.coeffs[1], out.coeffs[2], out.coeffs[3]);
    }
    return out;
}

bool verify_conjugacy(const PsiResult& psi, const MoebiusBranch& v, const MoebiusBranch& v_star) {
    if (psi.degenerate)
        throw Error(Errc::unsupported,
                    "degenerate psi: conjugacy holds trivially at the constant " +
                        (psi.constant ? psi.constant->str() : std::string("?")));
    return compose(*psi.branch, v).equivalent(compose(v_star, *psi.branch));
}

namespace {

bool condition_holds(const std::vector<ConditionResult>& conditions, const std::string& name) {
    for (const auto& c : conditions)
        if (c.name == name) return c.holds;
    throw Error(Errc::unsupported, "unknown condition: " + name);
}

void collect_relations(ClassificationReport& report) {
    for (const auto& c : report.conditions)
        if (c.holds && c.name.find("==") != std::string::npos &&
            c.name.find("V*") == std::string::npos)
            report.satisfied_relations.push_back(c.name);
}

} // namespace

ClassificationReport classify(const CaseParams& params, const TruncationPolicy& policy,
                              std::size_t grid_points) {
    ClassificationReport report;
    report.params = params;
    PiecewiseMoebiusMap map = build_map(params);
    report.type = classify_type(map);
    report.fixed_points = case_fixed_points(params);
    report.conditions = check_conditions(params);
    collect_relations(report);

    const CaseFixedPoints& fps = report.fixed_points;
    switch (params.family) {
        case Family::PPP: {
            report.psi = psi_map(params.lambda, params.mu);
            std::optional<QuadExt> satisfied_eta;
            const char* eta_names[2] = {"eta = -1", "eta = (nu-3)/2"};
            for (int i = 0; i < 2; ++i) {
                bool c1 = condition_holds(report.conditions,
                                          std::string("V*_mu(eta) == V*_lambda(eta) at ") + eta_names[i]);
                bool c2 = condition_holds(report.conditions,
                                          std::string("V*_mu(xi) == V*_lambda^2(eta) at ") + eta_names[i]);
                if (c1 && c2 && !satisfied_eta) satisfied_eta = fps.eta_candidates[i];
            }
            if (!satisfied_eta) break;
            if (fps.xi == ProjectiveScalar(*satisfied_eta)) {
                report.outcome = Outcome::point_dual;
                report.natural_dual_degenerate = true;
                report.xi_point = fps.xi;
                report.density = Density(point_dual_density(fps.xi));
            } else if (params.lambda == params.mu && params.nu == 1) {
                report.outcome = Outcome::one_step_extension;
                report.density = jump_extension(ppp2_base(params.lambda)).density;
            }
            break;
        }
        case Family::PMM: {
            bool c1 = condition_holds(report.conditions, "V*_mu(xi) == V*_nu(xi)");
            bool c2 = condition_holds(report.conditions, "V*_mu(eta) == V*_nu^2(eta)");
            if (!(c1 && c2)) break;
            if (fps.xi == ProjectiveScalar(fps.eta_candidates[0])) {
                report.outcome = Outcome::point_dual;
                report.natural_dual_degenerate = true;
                report.xi_point = fps.xi;
                report.density = Density(point_dual_density(fps.xi));
            } else if (params.mu == params.nu && params.lambda == 1) {
                report.outcome = Outcome::one_step_extension;
                report.density = jump_extension(pmm2_base(params.nu)).density;
            }
            break;
        }
        case Family::MPP: {
            bool c1 = condition_holds(report.conditions, "V*_lambda(eta) == V*_mu(eta) at eta = -1") ||
                      condition_holds(report.conditions, "V*_lambda(eta) == V*_mu(eta) at eta = nu-2");
            bool c2 = condition_holds(report.conditions, "V*_lambda(xi) == V*_nu(xi)");
            if (!(c1 && c2)) break;
            report.outcome = Outcome::exceptional_dual;
            report.one_step_extension_flag = params.mu == 1;
            QuadExt end_a = fps.eta_candidates[1]; // nu - 2
            QuadExt end_b = fps.xi.finite();
            if (end_a == end_b) {
                report.exceptional_point_degenerate = true;
                report.xi_point = fps.xi;
                report.density = Density(point_dual_density(fps.xi));
            } else {
                if (end_b < end_a) std::swap(end_a, end_b);
                report.dual_interval = std::make_pair(end_a, end_b);
                report.density = Density(dual_interval_density(end_a, end_b));
            }
            break;
        }
    }

    if (report.density)
        report.certificate = invariance_residual(map, *report.density, default_grid(grid_points), policy);
    return report;
}

Integer fibonacci(long n) {
    // start values F_{-2} = 1, F_{-1} = 0
    if (n < -3) throw Error(Errc::unsupported, "fibonacci index below -3");
    Integer prev = 1, curr = 0; // F_{-2}, F_{-1}
    if (n == -3) return Integer(-1); // extend backwards once: F_{-3} = F_{-1} - F_{-2}
    if (n == -2) return prev;
    if (n == -1) return curr;
    for (long k = 0; k <= n; ++k) {
        Integer next = prev + curr;
        prev = curr;
        curr = next;
    }
    return curr;
}

bool fibonacci_iterate_check(unsigned n_max) {
    MoebiusBranch v_alpha(QuadExt(2), QuadExt(-1), QuadExt(1), QuadExt(-1)); // (1-x)/(2-x)
    for (unsigned n = 1; n <= n_max; ++n) {
        MoebiusBranch lhs = iterate(v_alpha, n);
        MoebiusBranch rhs(QuadExt(Rational(fibonacci(static_cast<long>(n) + 1))),
                          QuadExt(-Rational(fibonacci(static_cast<long>(n) - 1))),
                          QuadExt(Rational(fibonacci(static_cast<long>(n) - 1))),
                          QuadExt(-Rational(fibonacci(static_cast<long>(n) - 3))));
        if (!lhs.equivalent(rhs)) return false;
    }
    return true;
}

} // namespace pfl
