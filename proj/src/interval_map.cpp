#include "pfl/interval_map.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <cmath>

namespace pfl {

ValidationReport validate(const PiecewiseMoebiusMap& map) {
    ValidationReport report;
    const std::size_t m = map.branches.size();
    if (m == 0 || map.partition.size() != m + 1) {
        report.structure_error = "partition must have exactly one more point than there are branches";
        return report;
    }
    if (!map.labels.empty() && map.labels.size() != m) {
        report.structure_error = "label count does not match branch count";
        return report;
    }
    if (map.partition.front() != QuadExt(0) || map.partition.back() != QuadExt(1)) {
        report.structure_error = "partition must start at 0 and end at 1";
        return report;
    }
    for (std::size_t k = 0; k + 1 < map.partition.size(); ++k) {
        if (!(map.partition[k] < map.partition[k + 1])) {
            report.structure_error = "partition points must be strictly increasing";
            return report;
        }
    }
    bool all_ok = true;
    for (std::size_t k = 0; k < m; ++k) {
        BranchCheck check;
        check.index = k;
        check.label = k < map.labels.size() ? map.labels[k] : "";
        const MoebiusBranch& v = map.branches[k];

        // no pole of V_k in [0,1]: a + b x keeps one sign on the interval
        int s0 = v.a().sign();
        int s1 = (v.a() + v.b()).sign();
        check.pole_free = s0 != 0 && s0 == s1;
        if (!check.pole_free) check.message = "denominator " + linear_str(v.a(), v.b(), "x") + " changes sign on [0,1]";

        if (check.pole_free) {
            QuadExt at0 = v.eval_finite(QuadExt(0));
            QuadExt at1 = v.eval_finite(QuadExt(1));
            QuadExt lo = at0 < at1 ? at0 : at1;
            QuadExt hi = at0 < at1 ? at1 : at0;
            check.endpoints_ok = lo == map.partition[k] && hi == map.partition[k + 1];
            if (!check.endpoints_ok)
                check.message = "branch image [" + lo.str() + ", " + hi.str() + "] != cylinder [" +
                                map.partition[k].str() + ", " + map.partition[k + 1].str() + "]";
        }
        all_ok = all_ok && check.ok();
        report.checks.push_back(std::move(check));
    }
    report.valid = all_ok;
    return report;
}

TypeSignature classify_type(const PiecewiseMoebiusMap& map) {
    TypeSignature sig;
    sig.reserve(map.branches.size());
    for (const auto& v : map.branches) sig.push_back(v.det().sign());
    return sig;
}

std::string type_signature_str(const TypeSignature& sig) {
    std::string out = "(";
    for (std::size_t k = 0; k < sig.size(); ++k) {
        if (k) out += ",";
        out += sig[k] > 0 ? "+" : (sig[k] < 0 ? "-" : "0");
    }
    return out + ")";
}

ForwardStep forward(const PiecewiseMoebiusMap& map, const QuadExt& x) {
    if (x < QuadExt(0) || x > QuadExt(1))
        throw Error(Errc::out_of_domain, "forward map needs x in [0,1], got " + x.str());
    std::size_t branch = map.branches.size() - 1; // x == 1 lands in the last cell
    for (std::size_t k = 1; k < map.partition.size(); ++k) {
        if (x < map.partition[k]) {
            branch = k - 1;
            break;
        }
    }
    QuadExt y = map.branches[branch].inverse().eval_finite(x);
    return {std::move(y), branch};
}

QuadExt transfer_eval_exact(const PiecewiseMoebiusMap& map, const LinearFactorDensity& g, const QuadExt& x) {
    QuadExt sum(0);
    for (const auto& v : map.branches)
        sum += g.eval_exact(v.eval_finite(x)) * v.jacobian(x, /*absolute=*/true);
    return sum;
}

TransferValue transfer_eval(const PiecewiseMoebiusMap& map, const Density& g, double x,
                            const TruncationPolicy& policy) {
    TransferValue out;
    for (const auto& v : map.branches) {
        double a = v.a().to_double();
        double b = v.b().to_double();
        double c = v.c().to_double();
        double d = v.d().to_double();
        double den = a + b * x;
        if (den == 0.0) throw Error(Errc::pole_at_point, "branch pole at grid point");
        double vx = (c + d * x) / den;
        double omega = std::fabs((a * d - b * c) / (den * den));
        DensityValue gv = g.eval(vx, policy);
        out.value += gv.value * omega;
        out.bound += gv.tail_bound * omega;
    }
    return out;
}

std::vector<QuadExt> default_grid(std::size_t points) {
    if (points < 2) throw Error(Errc::config_error, "grid needs at least 2 points");
    std::vector<QuadExt> grid;
    grid.reserve(points);
    for (std::size_t k = 0; k < points; ++k)
        grid.push_back(QuadExt(make_rational(Integer(static_cast<unsigned long>(k)),
                                             Integer(static_cast<unsigned long>(points - 1)))));
    return grid;
}

ResidualReport invariance_residual(const PiecewiseMoebiusMap& map, const Density& g,
                                   const std::vector<QuadExt>& grid, const TruncationPolicy& policy) {
    ResidualReport report;
    report.exact = g.closed_form();
    bool all_zero = true;
    for (const QuadExt& x : grid) {
        ResidualEntry entry;
        entry.x = x;
        try {
            if (g.closed_form()) {
                QuadExt gx = g.eval_exact(x);
                if (gx.is_zero()) throw Error(Errc::pole_at_point, "density vanishes; relative residual undefined");
                QuadExt lhs = transfer_eval_exact(map, g.as_closed(), x);
                QuadExt res = (lhs - gx) / gx;
                if (res.sign() != 0) all_zero = false;
                entry.residual = std::fabs(res.to_double());
                entry.bound = 0.0;
            } else {
                double xd = x.to_double();
                DensityValue gx = g.eval(xd, policy);
                TransferValue lhs = transfer_eval(map, g, xd, policy);
                double denom = std::fabs(gx.value);
                if (denom == 0.0) throw Error(Errc::pole_at_point, "density vanishes at grid point");
                entry.residual = std::fabs(lhs.value - gx.value) / denom;
                entry.bound = (lhs.bound + gx.tail_bound) / denom;
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

namespace {

struct ForwardDouble {
    std::vector<double> cuts;                    // interior partition points
    std::vector<std::array<double, 4>> inverse;  // (a,b,c,d) of V_k^{-1}

    explicit ForwardDouble(const PiecewiseMoebiusMap& map) {
        for (std::size_t k = 1; k + 1 < map.partition.size(); ++k)
            cuts.push_back(map.partition[k].to_double());
        for (const auto& v : map.branches) {
            MoebiusBranch inv = v.inverse();
            inverse.push_back({inv.a().to_double(), inv.b().to_double(), inv.c().to_double(),
                               inv.d().to_double()});
        }
    }

    double step(double x) const {
        std::size_t k = std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin();
        const auto& m = inverse[k];
        return (m[2] + m[3] * x) / (m[0] + m[1] * x);
    }
};

// Piecewise-affine maps with integer forward coefficients are exact on binary
// floats, and every double is a dyadic rational whose exact orbit falls onto a
// partition point and then the fixed point of the first branch. Such maps are
// instead iterated exactly on the grid {k/Q} with Q odd and coprime to 6: the
// grid contains no partition point of the families, so the trap cannot occur,
// and each step is integer arithmetic k -> s*k + t*Q.
struct ForwardAffineGrid {
    static constexpr long kDenominator = 1000000000000000007L; // odd, not divisible by 3
    std::vector<Integer> cutoffs; // branch k active while state < cutoff_k
    std::vector<Integer> slopes, intercepts;
    Integer q;

    static std::optional<ForwardAffineGrid> try_build(const PiecewiseMoebiusMap& map) {
        ForwardAffineGrid grid;
        grid.q = kDenominator;
        for (const auto& v : map.branches) {
            MoebiusBranch inv = v.inverse(); // T(x) = (-c + a x)/d on this cell
            if (!inv.b().is_zero() || !inv.a().is_rational() || !inv.c().is_rational() ||
                !inv.d().is_rational())
                return std::nullopt;
            Rational slope = inv.d().rational_part() / inv.a().rational_part();
            Rational intercept = inv.c().rational_part() / inv.a().rational_part();
            if (slope.get_den() != 1 || intercept.get_den() != 1) return std::nullopt;
            grid.slopes.push_back(slope.get_num());
            grid.intercepts.push_back(intercept.get_num());
        }
        for (std::size_t k = 1; k + 1 < map.partition.size(); ++k) {
            const QuadExt& point = map.partition[k];
            if (!point.is_rational()) return std::nullopt;
            Integer cutoff;                               // ceil(num * Q / den)
            Integer scaled = point.rational_part().get_num() * grid.q;
            mpz_cdiv_q(cutoff.get_mpz_t(), scaled.get_mpz_t(),
                       point.rational_part().get_den().get_mpz_t());
            grid.cutoffs.push_back(cutoff);
        }
        return grid;
    }

    Integer seed(double x0) const {
        Integer k(static_cast<long>(x0 * 1e18));
        k = k * q / Integer(1000000000000000000L);
        if (k <= 0) k = 1;
        if (k >= q) k = q - 1;
        return k;
    }

    Integer step(const Integer& state) const {
        std::size_t branch = cutoffs.size();
        for (std::size_t k = 0; k < cutoffs.size(); ++k) {
            if (state < cutoffs[k]) {
                branch = k;
                break;
            }
        }
        return slopes[branch] * state + intercepts[branch] * q;
    }
};

} // namespace

Histogram orbit_histogram(const PiecewiseMoebiusMap& map, double x0, std::size_t iterations,
                          std::size_t bins, std::size_t burn_in) {
    if (bins == 0) throw Error(Errc::config_error, "histogram needs at least one bin");
    if (!(x0 > 0.0 && x0 < 1.0))
        throw Error(Errc::out_of_domain, "orbit seed must lie in (0,1)");
    Histogram hist;
    hist.mass.assign(bins, 0.0);
    hist.iterations = iterations;
    hist.burn_in = burn_in;
    if (iterations == 0) return hist;

    if (auto grid = ForwardAffineGrid::try_build(map)) {
        Integer state = grid->seed(x0);
        Integer bins_z(static_cast<unsigned long>(bins));
        for (std::size_t i = 0; i < burn_in + iterations; ++i) {
            state = grid->step(state);
            if (state < 0 || state > grid->q)
                throw Error(Errc::orbit_escaped, "orbit left [0,1] at iteration " + std::to_string(i));
            if (i < burn_in) continue;
            Integer bin = state * bins_z / grid->q;
            std::size_t b = std::min<std::size_t>(bins - 1, bin.get_ui());
            hist.mass[b] += 1.0;
        }
        for (double& m : hist.mass) m /= static_cast<double>(iterations);
        return hist;
    }

    const double guard = 1e-9;
    ForwardDouble fwd(map);
    double x = x0;
    std::size_t frozen = 0;
    auto advance = [&](std::size_t i) {
        double y = fwd.step(x);
        if (y < -guard || y > 1.0 + guard || !std::isfinite(y))
            throw Error(Errc::orbit_escaped, "orbit left [0,1] at iteration " + std::to_string(i));
        frozen = y == x ? frozen + 1 : 0;
        if (frozen > 64)
            throw Error(Errc::orbit_escaped, "orbit collapsed onto a fixed point near " +
                                                 std::to_string(y));
        x = std::clamp(y, 0.0, 1.0);
    };
    for (std::size_t i = 0; i < burn_in; ++i) advance(i);
    for (std::size_t i = 0; i < iterations; ++i) {
        advance(burn_in + i);
        std::size_t bin = std::min(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)));
        hist.mass[bin] += 1.0;
    }
    for (double& m : hist.mass) m /= static_cast<double>(iterations);
    return hist;
}

} // namespace pfl
