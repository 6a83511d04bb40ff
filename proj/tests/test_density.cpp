#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "pfl/density.hpp"
#include "pfl/extensions.hpp"

using namespace pfl;

namespace {

QuadExt q(const char* text) { return parse_quad(text); }

// independent quadrature oracle for the tests
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 48);
}

} // namespace

TEST_CASE("closed-form evaluation and poles") {
    // 1/((1-x)(2-x))
    LinearFactorDensity g =
        LinearFactorDensity::one_over({{QuadExt(1), QuadExt(-1)}, {QuadExt(2), QuadExt(-1)}});
    CHECK(g.eval_exact(QuadExt(0)) == q("1/2"));
    CHECK(g.eval_exact(q("1/2")) == q("4/3"));
    CHECK_THROWS_AS(g.eval_exact(QuadExt(1)), Error);
    CHECK(g.str() == "1/((1 - x)*(2 - x))");
}

TEST_CASE("point dual densities") {
    CHECK(point_dual_density(ProjectiveScalar(QuadExt(0))).eval_exact(q("2/7")) == QuadExt(1));
    LinearFactorDensity cauchy = point_dual_density(ProjectiveScalar(QuadExt(1)));
    CHECK(cauchy.eval_exact(QuadExt(1)) == q("1/4")); // 1/(1+x)^2
    QuadExt xi = (QuadExt(-3) + sqrt_adjoin(Rational(5))) / QuadExt(2);
    LinearFactorDensity surd = point_dual_density(ProjectiveScalar(xi));
    QuadExt at_half = surd.eval_exact(q("1/2"));
    QuadExt factor = QuadExt(1) + xi * q("1/2");
    CHECK(at_half * factor * factor == QuadExt(1));
    // xi = inf gives 1/x^2
    CHECK(point_dual_density(ProjectiveScalar::infinity()).eval_exact(q("1/3")) == QuadExt(9));
    CHECK_THROWS_AS(point_dual_density(ProjectiveScalar(QuadExt(-2))), Error);
}

TEST_CASE("dual interval densities") {
    LinearFactorDensity unit = dual_interval_density(QuadExt(0), QuadExt(1));
    CHECK(unit.eval_exact(q("1/2")) == q("2/3")); // 1/(1+x) at 1/2
    LinearFactorDensity sym = dual_interval_density(q("-1/2"), q("1/2"));
    CHECK(sym.eval_exact(q("1/2")) == q("16/15")); // 1/((1-x/2)(1+x/2))
    CHECK_THROWS_AS(dual_interval_density(QuadExt(1), QuadExt(1)), Error);
    CHECK_THROWS_AS(dual_interval_density(QuadExt(-3), QuadExt(0)), Error);
    // endpoints may come unsorted
    CHECK(dual_interval_density(QuadExt(1), QuadExt(0)).eval_exact(q("1/2")) == q("2/3"));
}

TEST_CASE("dual interval density matches quadrature of the defining integral") {
    std::mt19937 rng(211);
    std::uniform_int_distribution<long> end_num(-9, 30);
    int done = 0;
    while (done < 20) {
        QuadExt p{make_rational(end_num(rng), 10)};
        QuadExt r{make_rational(end_num(rng), 10)};
        if (p < QuadExt(-1) || r < QuadExt(-1) || p == r) continue;
        LinearFactorDensity closed = dual_interval_density(p, r);
        double pd = p.to_double(), rd = r.to_double();
        if (pd > rd) std::swap(pd, rd);
        double x = (done + 1) / 22.0;
        auto integrand = [&](double y) { return 1.0 / ((1.0 + x * y) * (1.0 + x * y)); };
        double oracle = integrate(integrand, pd, rd);
        CHECK(closed.eval_double(x) == doctest::Approx(oracle).epsilon(1e-12));
        ++done;
    }
}

TEST_CASE("series terms reproduce the printed denominators of the increasing case") {
    // h(V_beta^n x) |w^n(x)| expands to 1/((1-x)((n-1)L + 1 - ((n-2)L + 1)x))
    for (const char* lam : {"1", "3/5", "1/2", "7/8"}) {
        BaseSystem base = ppp2_base(parse_rational(lam));
        SeriesDensity g(base.density, base.map.branches[1], 2);
        QuadExt L{parse_rational(lam)};
        for (std::size_t n = 0; n <= 5; ++n) {
            for (int xk = 1; xk < 5; ++xk) {
                QuadExt x{make_rational(xk, 5)};
                QuadExt denom = (QuadExt(long(n)) - QuadExt(1)) * L + QuadExt(1) -
                                ((QuadExt(long(n)) - QuadExt(2)) * L + QuadExt(1)) * x;
                QuadExt expected = QuadExt(1) / ((QuadExt(1) - x) * denom);
                CHECK(g.term_exact(n, x) == expected);
            }
        }
    }
}

TEST_CASE("series terms reproduce the printed denominators of the mixed case") {
    // (1/x) * 1/(1 + (n + nu - 1)x)
    for (const char* nu : {"2", "1", "5/3"}) {
        BaseSystem base = pmm2_base(parse_rational(nu));
        SeriesDensity g(base.density, base.map.branches[0], 2);
        QuadExt N{parse_rational(nu)};
        for (std::size_t n = 0; n <= 5; ++n) {
            for (int xk = 1; xk < 5; ++xk) {
                QuadExt x{make_rational(xk, 5)};
                QuadExt expected =
                    QuadExt(1) / (x * (QuadExt(1) + (QuadExt(long(n)) + N - QuadExt(1)) * x));
                CHECK(g.term_exact(n, x) == expected);
            }
        }
    }
}

TEST_CASE("alternating truncation error is bounded by the first omitted term") {
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    SeriesDensity g(base.density, base.map.branches[1], 2);
    for (double x : {0.1, 0.37, 0.5, 0.82}) {
        double coarse = g.partial_sum_double(100, x);
        double fine = g.partial_sum_double(10000, x);
        MoebiusBranch power = iterate(base.map.branches[1], 100); // first omitted term
        double den = power.a().to_double() + power.b().to_double() * x;
        double value = (power.c().to_double() + power.d().to_double() * x) / den;
        double omega = std::fabs(power.det().to_double()) / (den * den);
        double first_omitted = base.density.eval_double(value) * omega;
        CHECK(std::fabs(fine - coarse) <= first_omitted * (1 + 1e-9));
    }
}

TEST_CASE("accelerated evaluation matches the integral representation") {
    // sum over the 1-step pattern equals (1/(1-x)) * (1/B) * int_0^1 dw/(1 + w^(A/B))
    // with A = L(1-x), B = 1 - L + (2L - 1)x, via u^B = w
    for (const char* lam : {"3/5", "1"}) {
        BaseSystem base = ppp2_base(parse_rational(lam));
        SeriesDensity g(base.density, base.map.branches[1], 2);
        double L = parse_rational(lam).get_d();
        for (double x : {0.15, 0.5, 0.85}) {
            double A = L * (1 - x);
            double B = 1 - L + (2 * L - 1) * x;
            auto integrand = [&](double w) { return 1.0 / (1.0 + std::pow(w, A / B)); };
            double oracle = integrate(integrand, 1e-14, 1.0) / (B * (1 - x));
            DensityValue value = g.eval(x, TruncationPolicy{200, 1e-12});
            CHECK(value.method == std::string("accelerated"));
            CHECK(value.value == doctest::Approx(oracle).epsilon(1e-10));
        }
    }
}

TEST_CASE("geometrically decaying series stop early with a verified tail") {
    BaseSystem base = mpp2_base(Rational(1));
    SeriesDensity g(base.density, base.map.branches[0], 2);
    DensityValue value = g.eval(0.4, TruncationPolicy{1000, 1e-12});
    CHECK(value.method == std::string("plain"));
    CHECK(value.tail_verified);
    CHECK(value.tail_bound <= 1e-12);
    LinearFactorDensity closed = mpp2_closed_density(Rational(1));
    CHECK(value.value == doctest::Approx(closed.eval_double(0.4)).epsilon(1e-11));
}

TEST_CASE("telescoped closed form agrees with the series for several parameters") {
    for (const char* nu : {"1", "2", "3", "1/2", "7/4"}) {
        BaseSystem base = mpp2_base(parse_rational(nu));
        SeriesDensity series(base.density, base.map.branches[0], 2);
        LinearFactorDensity closed = mpp2_closed_density(parse_rational(nu));
        for (double x : {0.1, 0.45, 0.9}) {
            double s = series.partial_sum_double(200, x);
            CHECK(closed.eval_double(x) == doctest::Approx(s).epsilon(1e-12));
        }
    }
}

TEST_CASE("paper densities are positive away from poles") {
    std::vector<Density> densities;
    densities.emplace_back(point_dual_density(ProjectiveScalar(QuadExt(0))));
    densities.emplace_back(point_dual_density(ProjectiveScalar(QuadExt(1))));
    densities.emplace_back(mpp2_closed_density(Rational(1)));
    densities.emplace_back(
        SeriesDensity(ppp2_base(parse_rational("3/5")).density,
                      ppp2_base(parse_rational("3/5")).map.branches[1], 2));
    densities.emplace_back(SeriesDensity(pmm2_base(Rational(2)).density,
                                         pmm2_base(Rational(2)).map.branches[0], 2));
    for (const auto& g : densities) {
        for (int k = 1; k < 20; ++k) {
            double x = k / 20.0;
            try {
                CHECK(g.eval(x, TruncationPolicy{300, 1e-10}).value > 0.0);
            } catch (const Error&) {
            }
        }
    }
}

TEST_CASE("even partial sums stay positive on the interior") {
    BaseSystem base = ppp2_base(parse_rational("3/5"));
    SeriesDensity g(base.density, base.map.branches[1], 2);
    for (std::size_t terms : {2, 4, 10, 40}) {
        for (int k = 1; k < 10; ++k) {
            QuadExt x{make_rational(k, 10)};
            CHECK(g.partial_sum_exact(terms, x).sign() > 0);
        }
    }
}

TEST_CASE("pullback composes the density with a branch exactly") {
    std::mt19937 rng(223);
    BaseSystem base = mpp2_base(Rational(3));
    const MoebiusBranch& v = base.map.branches[0];
    LinearFactorDensity pulled = base.density.pullback(v);
    for (int trial = 0; trial < 30; ++trial) {
        QuadExt x{make_rational(trial + 1, 37)};
        QuadExt expected = base.density.eval_exact(v.eval_finite(x)) * v.jacobian(x, true);
        CHECK(pulled.eval_exact(x) == expected);
    }
    // one-factor terms pick up the branch denominator
    LinearFactorDensity single = LinearFactorDensity::one_over({{QuadExt(1), QuadExt(-1)}});
    LinearFactorDensity moved = single.pullback(v);
    QuadExt x{make_rational(2, 7)};
    CHECK(moved.eval_exact(x) == single.eval_exact(v.eval_finite(x)) * v.jacobian(x, true));
}
