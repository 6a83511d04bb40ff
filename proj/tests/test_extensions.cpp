#include <doctest.h>

#include <cmath>

#include "pfl/cases.hpp"
#include "pfl/extensions.hpp"

using namespace pfl;

namespace {

QuadExt q(const char* text) { return parse_quad(text); }

bool maps_equivalent(const PiecewiseMoebiusMap& lhs, const PiecewiseMoebiusMap& rhs) {
    if (lhs.size() != rhs.size() || lhs.partition.size() != rhs.partition.size()) return false;
    for (std::size_t k = 0; k < lhs.partition.size(); ++k)
        if (!(lhs.partition[k] == rhs.partition[k])) return false;
    for (std::size_t k = 0; k < lhs.size(); ++k)
        if (!lhs.branches[k].equivalent(rhs.branches[k])) return false;
    return true;
}

CaseParams params(Family f, const char* l, const char* m, const char* n) {
    return CaseParams{f, parse_rational(l), parse_rational(m), parse_rational(n)};
}

} // namespace

TEST_CASE("one-step extensions reproduce the three family specializations") {
    // increasing base {V_lambda, V_beta}: mu = lambda, nu = 1 on 0 < 1/2 < 2/3 < 1
    ExtensionResult ppp = jump_extension(ppp2_base(parse_rational("4/7")));
    CHECK(ppp.map.partition[2] == q("2/3"));
    CHECK(maps_equivalent(ppp.map, build_map(params(Family::PPP, "4/7", "4/7", "1"))));

    // base {x/(1+x), V_nu}: lambda = 1, mu = nu on 0 < 1/3 < 1/2 < 1
    ExtensionResult pmm = jump_extension(pmm2_base(parse_rational("5/2")));
    CHECK(maps_equivalent(pmm.map, build_map(params(Family::PMM, "1", "5/2", "5/2"))));

    // base {(1-x)/(2-x), V_nu}: mu = 1 and the lambda branch carries nu
    ExtensionResult mpp = jump_extension(mpp2_base(parse_rational("3")));
    CHECK(maps_equivalent(mpp.map, build_map(params(Family::MPP, "3", "1", "3"))));
}

TEST_CASE("n-step extensions have 2^n + 1 branches and validate") {
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    for (unsigned n = 1; n <= 5; ++n) {
        ExtensionResult ext = n_step_extension(base, n);
        CHECK(ext.map.size() == (std::size_t(1) << n) + 1);
        CHECK(validate(ext.map).valid);
        CHECK(ext.density.as_series().stride() == (std::uint64_t(1) << n));
    }
    ExtensionResult one = n_step_extension(base, 1);
    CHECK(maps_equivalent(one.map, jump_extension(base).map));
    CHECK_THROWS_AS(n_step_extension(base, 0), Error);

    BaseSystem mixed = mpp2_base(Rational(1));
    for (unsigned n = 1; n <= 3; ++n)
        CHECK(n_step_extension(mixed, n).map.size() == (std::size_t(1) << n) + 1);
}

TEST_CASE("series exponent patterns follow the displayed two-step and three-step series") {
    BaseSystem base = ppp2_base(Rational(1));
    SeriesDensity g1 = n_step_extension(base, 1).density.as_series();
    SeriesDensity g2 = n_step_extension(base, 2).density.as_series();
    SeriesDensity g3 = n_step_extension(base, 3).density.as_series();
    std::vector<std::uint64_t> e1, e2, e3;
    for (std::size_t k = 0; k < 6; ++k) {
        e1.push_back(g1.exponent(k));
        e2.push_back(g2.exponent(k));
        e3.push_back(g3.exponent(k));
        CHECK(g1.term_sign(k) == (k % 2 ? -1 : 1));
    }
    CHECK(e1 == std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5});
    CHECK(e2 == std::vector<std::uint64_t>{0, 1, 4, 5, 8, 9});
    CHECK(e3 == std::vector<std::uint64_t>{0, 1, 8, 9, 16, 17});
}

TEST_CASE("series terms equal the iterated pullbacks exactly") {
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    for (unsigned n : {1u, 2u, 3u}) {
        SeriesDensity g = n_step_extension(base, n).density.as_series();
        const MoebiusBranch& v = base.map.branches[1];
        for (std::size_t k = 0; k < 6; ++k) {
            MoebiusBranch power = iterate(v, g.exponent(k));
            for (int xi = 1; xi <= 10; ++xi) {
                QuadExt x{make_rational(xi, 11)};
                QuadExt expected = base.density.eval_exact(power.eval_finite(x)) *
                                   power.jacobian(x, true);
                CHECK(g.term_exact(k, x) == expected);
            }
        }
    }
}

TEST_CASE("constructed densities satisfy the half-stride recurrence exactly") {
    // g_{n-1}(x) = g_n(x) + g_n(V^s x) |w^s(x)| with s = 2^(n-1), already at the
    // level of partial sums: 2m terms on the right make 4m terms on the left.
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    SeriesDensity g1 = n_step_extension(base, 1).density.as_series();
    SeriesDensity g2 = n_step_extension(base, 2).density.as_series();
    MoebiusBranch v2 = iterate(base.map.branches[1], 2);
    for (int xi = 1; xi <= 5; ++xi) {
        QuadExt x{make_rational(xi, 6)};
        for (std::size_t m : {1, 3, 8}) {
            QuadExt lhs = g1.partial_sum_exact(4 * m, x);
            QuadExt rhs = g2.partial_sum_exact(2 * m, x) +
                          g2.partial_sum_exact(2 * m, v2.eval_finite(x)) * v2.jacobian(x, true);
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("each extension density passes its own invariance check") {
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    for (unsigned n = 1; n <= 3; ++n) {
        ExtensionResult ext = n_step_extension(base, n);
        ResidualReport report = invariance_residual(ext.map, ext.density, default_grid(41),
                                                    TruncationPolicy{4000, 1e-12});
        CHECK(report.evaluated > 30);
        CHECK(report.max_residual <= 2.0 * report.max_bound + 1e-10);
    }
}

TEST_CASE("g_n converges monotonically to g_infinity") {
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    LinearFactorDensity limit = g_infinity(base);
    std::vector<double> distances;
    for (unsigned n = 1; n <= 5; ++n) {
        SeriesDensity gn(base.density, base.map.branches[1], std::uint64_t(1) << n);
        double dist = 0.0;
        for (int k = 1; k < 50; ++k) {
            double x = k / 50.0;
            double value = gn.eval(x, TruncationPolicy{20000, 1e-11}).value;
            dist = std::max(dist, std::fabs(value - limit.eval_double(x)));
        }
        distances.push_back(dist);
    }
    for (std::size_t k = 1; k < distances.size(); ++k) CHECK(distances[k] < distances[k - 1]);
}

TEST_CASE("g_infinity closed forms") {
    // lambda = 1 base: h = 1/(x(1-x)), g_inf = 1/x
    LinearFactorDensity ginf = g_infinity(ppp2_base(Rational(1)));
    CHECK(ginf.eval_exact(q("1/2")) == QuadExt(2));
    CHECK(ginf.eval_exact(q("1/5")) == QuadExt(5));

    // decreasing base at nu = 1: g_inf = h(V_nu x)|w_nu(x)| = 1/((1-x)(2-x))
    LinearFactorDensity jump_density = g_infinity(mpp2_base(Rational(1)));
    CHECK(jump_density.eval_exact(QuadExt(0)) == q("1/2"));
    CHECK(jump_density.eval_exact(q("1/2")) == q("4/3"));
}

TEST_CASE("g_infinity is invariant under the accelerated map's transfer sum") {
    // the accelerated map applies the jump branch until the orbit enters the
    // kept cylinder; its inverse branches are V_jump^n o V_kept, and
    //   sum_n g_inf(V_jump^n V_kept x) |w_jump^n(V_kept x)| |w_kept(x)| = g_inf(x)
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    const MoebiusBranch& kept = base.map.branches[0];
    const MoebiusBranch& jump = base.map.branches[1];
    LinearFactorDensity ginf = g_infinity(base);
    auto partial = [&](double x, std::size_t terms) {
        double y = kept.eval_finite(QuadExt(make_rational(long(x * 1000), 1000))).to_double();
        double wk = std::fabs(kept.jacobian(QuadExt(make_rational(long(x * 1000), 1000)), true).to_double());
        double a = 1, b = 0, c = 0, d = 1; // V_jump^n in doubles
        double ja = jump.a().to_double(), jb = jump.b().to_double();
        double jc = jump.c().to_double(), jd = jump.d().to_double();
        double sum = 0.0;
        for (std::size_t n = 0; n < terms; ++n) {
            double den = a + b * y;
            double vy = (c + d * y) / den;
            double omega = std::fabs(a * d - b * c) / (den * den);
            sum += ginf.eval_double(vy) * omega * wk;
            double na = ja * a + jb * c, nb = ja * b + jb * d;
            double nc = jc * a + jd * c, nd = jc * b + jd * d;
            a = na; b = nb; c = nc; d = nd;
        }
        return sum;
    };
    for (double x : {0.125, 0.5, 0.875}) {
        double target = ginf.eval_double(x);
        double err_coarse = std::fabs(partial(x, 2000) - target);
        double err_fine = std::fabs(partial(x, 4000) - target);
        CHECK(err_coarse < 2e-3 * std::fabs(target));
        CHECK(err_fine < err_coarse);
    }
}

TEST_CASE("jump identity holds exactly for the telescoped closed form") {
    for (const char* nu : {"1", "2", "7/3"}) {
        BaseSystem base = mpp2_base(parse_rational(nu));
        Density closed(mpp2_closed_density(parse_rational(nu)));
        ResidualReport report = verify_lemma1(base, closed, default_grid(101), TruncationPolicy{});
        CHECK(report.exact);
        CHECK(report.exact_zero);
    }
}

TEST_CASE("jump identity for series densities meets the stated tolerance") {
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    Density series(SeriesDensity(base.density, base.map.branches[1], 2));
    std::vector<QuadExt> grid = {q("1/2")};
    ResidualReport report = verify_lemma1(base, series, grid, TruncationPolicy{500, 1e-12});
    CHECK(report.evaluated == 1);
    CHECK(report.max_residual < 1e-10);

    ResidualReport empty = verify_lemma1(base, series, {}, TruncationPolicy{});
    CHECK(empty.entries.empty());
    CHECK(empty.evaluated == 0);
}

TEST_CASE("printed two-step series of the golden-ratio case matches the construction") {
    // six printed terms: 1/(1-x) - 1/(2-x) + 2/(5-2x) - 5/(13-5x) + 13/(34-13x) - 34/(89-34x);
    // termwise they differ from h(V^e x) w^e(x), but the three pair sums agree exactly.
    BaseSystem base = mpp2_base(Rational(1));
    SeriesDensity g2 = n_step_extension(base, 2).density.as_series();
    auto printed_term = [](long c, long p, long s, const QuadExt& x) {
        return QuadExt(Rational(c)) / (QuadExt(Rational(p)) - QuadExt(Rational(s)) * x);
    };
    for (int xi = 1; xi <= 10; ++xi) {
        QuadExt x{make_rational(xi, 11)};
        QuadExt printed = printed_term(1, 1, 1, x) - printed_term(1, 2, 1, x) +
                          printed_term(2, 5, 2, x) - printed_term(5, 13, 5, x) +
                          printed_term(13, 34, 13, x) - printed_term(34, 89, 34, x);
        QuadExt constructed = g2.partial_sum_exact(6, x);
        CHECK(printed == constructed);
        // pairwise agreement, not termwise
        QuadExt printed_pair = printed_term(2, 5, 2, x) - printed_term(5, 13, 5, x);
        QuadExt constructed_pair = g2.term_exact(2, x) - g2.term_exact(3, x);
        CHECK(printed_pair == constructed_pair);
        CHECK(printed_term(2, 5, 2, x) != g2.term_exact(2, x));
    }
}

TEST_CASE("invalid bases are rejected") {
    BaseSystem broken = ppp2_base(parse_rational("1/2"));
    broken.jump_label = "nope";
    CHECK_THROWS_AS(jump_extension(broken), Error);
    BaseSystem three = ppp2_base(parse_rational("1/2"));
    three.map.branches.push_back(three.map.branches[0]);
    CHECK_THROWS_AS(jump_extension(three), Error);
}
