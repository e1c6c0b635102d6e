#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qhj/polyrat.hpp"

using namespace qhj;
using P = Poly<double>;
using RF = RationalFn<double>;
using PQ = Poly<Rational>;
using RQ = RationalFn<Rational>;

namespace {

// residue by trapezoid on a small circle
Complex contour_residue(const RF& r, double pole, double radius = 1e-2, int samples = 400) {
    Complex sum = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = 2.0 * std::numbers::pi * k / samples;
        const Complex z = pole + radius * std::polar(1.0, t);
        sum += r(z) * (z - pole);
    }
    return sum / static_cast<double>(samples);
}

P random_poly(std::mt19937& rng, int degree) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    P::Coeffs c(degree + 1);
    for (int k = 0; k <= degree; ++k) c(k) = u(rng);
    if (std::abs(c(degree)) < 0.3) c(degree) = 1.0;
    return P(c);
}

}  // namespace

TEST_CASE("poly basics") {
    const P p{1.0, 0.0, 3.0, 0.0, 0.0};
    CHECK(p.degree() == 2);
    CHECK(P{}.is_zero());
    CHECK(p(2.0) == doctest::Approx(13.0));
    CHECK(p.derivative() == P{0.0, 6.0});

    const auto [q, r] = divmod(P{-1.0, 0.0, 1.0}, P{-1.0, 1.0});
    CHECK(q == P{1.0, 1.0});
    CHECK(r.is_zero());

    // gcd((y-1)(y+2), (y-1)(y-3)) = y - 1
    const PQ a = PQ{-1, 1} * PQ{2, 1};
    const PQ b = PQ{-1, 1} * PQ{-3, 1};
    CHECK(gcd(a, b) == (PQ{-1, 1}));
}

TEST_CASE("rational fn is stored reduced") {
    const RQ r(PQ{-1, 0, 1}, PQ{-1, 1});  // (y^2-1)/(y-1)
    CHECK(r.denominator().degree() == 0);
    CHECK(r.numerator() == (PQ{1, 1}));
    CHECK(r.is_reduced());
    CHECK_THROWS(RQ(PQ{1}, PQ{}));
}

TEST_CASE("derivative examples") {
    const RQ inv(PQ{1}, PQ{0, 1});
    const RQ d = inv.derivative();
    CHECK(d.numerator() == (PQ{-1}));
    CHECK(d.denominator() == (PQ{0, 0, 1}));

    CHECK(RQ::constant(Rational(7)).derivative().is_zero());

    // y/(1-y^2) -> (1+y^2)/(1-y^2)^2
    const RQ r(PQ{0, 1}, PQ{1, 0, -1});
    const RQ expected(PQ{1, 0, 1}, PQ{1, 0, -1} * PQ{1, 0, -1});
    const RQ diff = r.derivative() - expected;
    CHECK(diff.is_zero());

    const RF rd = r.cast<double>();
    const double y = 0.3, h = 1e-6;
    const double fd = (rd(y + h) - rd(y - h)) / (2 * h);
    CHECK(rd.derivative()(y) == doctest::Approx(fd).epsilon(1e-8));
    CHECK(rd.derivative()(y) == doctest::Approx((1 + y * y) / std::pow(1 - y * y, 2)));
}

TEST_CASE("laurent examples") {
    // 1/(1-y^2)^2 at y=1: order 2 coefficient 1/4
    const RQ r(PQ{1}, PQ{1, 0, -1} * PQ{1, 0, -1});
    const auto L = laurent_at(r, Rational(1));
    CHECK(L.max_order == 2);
    CHECK(L.coefficient(2) == Rational(1, 4));

    const auto L1 = laurent_at(RQ(PQ{1}, PQ{0, 1}), Rational(0));
    CHECK(L1.max_order == 1);
    CHECK(L1.coefficient(1) == Rational(1));

    // A(A+a)/(a^2 (1-y^2)) with A=4, a=1 at y=-1
    const RQ rm(PQ{20}, PQ{1, 0, -1});
    const auto L2 = laurent_at(rm, Rational(-1));
    CHECK(L2.coefficient(1) == Rational(10));
    const Complex q = contour_residue(rm.cast<double>(), -1.0);
    CHECK(std::abs(q - 10.0) < 1e-10);

    CHECK_THROWS_AS(laurent_at(rm, Rational(2)), Error);
}

TEST_CASE("expansion at infinity examples") {
    const auto s = expansion_at_infinity(RQ(PQ{1, 0, 1}, PQ{0, 0, 1}), 2);
    CHECK(s.top_power == 0);
    CHECK(s.coefficient(0) == Rational(1));
    CHECK(s.coefficient(-1) == Rational(0));
    CHECK(s.coefficient(-2) == Rational(1));

    const auto a = expansion_at_infinity(RQ(PQ{1}, PQ{1, 0, -1}), 3);
    CHECK(a.top_power == -2);
    CHECK(a.coefficient(-2) == Rational(-1));

    const auto b = expansion_at_infinity(RQ(PQ{0, 1}, PQ{1, 0, -1}), 3);
    CHECK(b.top_power == -1);
    CHECK(b.coefficient(-1) == Rational(-1));
}

TEST_CASE("global residue theorem on random rationals") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> pick(-4, 4);
    std::uniform_int_distribution<int> order(1, 2);
    for (int trial = 0; trial < 60; ++trial) {
        // distinct integer poles, orders 1 or 2
        std::vector<int> poles;
        while (poles.size() < 3) {
            const int p = pick(rng);
            if (std::find(poles.begin(), poles.end(), p) == poles.end()) poles.push_back(p);
        }
        PQ den{1};
        for (int p : poles)
            for (int k = order(rng); k > 0; --k) den = den * PQ{Rational(-p), Rational(1)};
        PQ::Coeffs c(den.degree() + 1);
        for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = Rational(pick(rng), 1 + std::abs(pick(rng)));
        const RQ r(PQ(c), den);

        // residue at infinity is minus the 1/y coefficient
        Rational total = -expansion_at_infinity(r, 1).coefficient(-1);
        for (int p : poles) {
            if (r.denominator()(Rational(p)) != 0) continue;  // cancelled
            total += laurent_at(r, Rational(p)).coefficient(1);
        }
        CHECK(total == 0);
    }
}

TEST_CASE("laurent agrees with contour quadrature") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 40; ++trial) {
        const double a = u(rng), b = a + 0.5 + std::abs(u(rng));
        const P den = P::linear_factor(a) * P::linear_factor(a) * P::linear_factor(b);
        const RF r(random_poly(rng, 2), den);
        const auto L = laurent_at(r, a);
        const Complex q = contour_residue(r, a, 1e-2, 200);
        CHECK(std::abs(q - L.coefficient(1)) <= 1e-8 * std::max(1.0, std::abs(L.coefficient(1))));
    }
}

TEST_CASE("derivative agrees with finite differences") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const RF r(random_poly(rng, 3), random_poly(rng, 2));
        const double y = u(rng);
        if (std::abs(r.denominator()(y)) < 0.2) continue;
        const double h = 1e-6;
        const double fd = (r(y + h) - r(y - h)) / (2 * h);
        const double an = r.derivative()(y);
        CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("sturm root isolation") {
    const P p = P::linear_factor(-0.5) * P::linear_factor(0.25) * P::linear_factor(0.9) * P{1.0, 0.0, 1.0};
    CHECK(count_real_roots(p, -1.0, 1.0) == 3);
    const auto roots = real_roots(p, -1.0, 1.0);
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == doctest::Approx(-0.5));
    CHECK(roots[1] == doctest::Approx(0.25));
    CHECK(roots[2] == doctest::Approx(0.9));
}
