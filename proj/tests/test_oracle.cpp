#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "qhj/oracle.hpp"
#include "qhj/solver.hpp"

using namespace qhj;
using namespace qhj::oracle;

namespace {

PotentialSpec harmonic() { return instantiate("harmonic", {}); }
PotentialSpec rm() { return instantiate("rosen_morse", {{"A", 4.0}, {"alpha", 1.0}}); }
PotentialSpec scarf(double A, double B) { return instantiate("scarf1", {{"A", A}, {"B", B}, {"alpha", 1.0}}); }

int interior_sign_changes(const Eigen::VectorXd& v) {
    const double big = v.cwiseAbs().maxCoeff();
    int changes = 0, last = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) < 1e-6 * big) continue;  // tails are solver noise
        const int s = v(i) > 0 ? 1 : -1;
        if (last && s != last) ++changes;
        last = s;
    }
    return changes;
}

// eigenvalues below E from the sign changes of the leading principal minors
int minors_count(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double E) {
    double p0 = 1.0, p1 = d(0) - E;
    int changes = (p1 < 0);
    for (Eigen::Index k = 1; k < d.size(); ++k) {
        const double p2 = (d(k) - E) * p1 - e(k - 1) * e(k - 1) * p0;
        changes += (p2 < 0) != (p1 < 0);
        p0 = p1;
        p1 = p2;
    }
    return changes;
}

}  // namespace

TEST_CASE("discretize examples") {
    const Grid g{-12.0, 12.0, 4001};
    const auto op = discretize(harmonic(), g, Stencil::three_point);
    const double h = g.step();
    CHECK(op.dimension() == 3999);
    for (int i : {0, 1000, 1999, 3998}) {
        const double x = g.x(i + 1);
        CHECK(op.diagonal(i) == doctest::Approx(2 / (h * h) + x * x));
    }
    CHECK(op.off_diagonal(17) == doctest::Approx(-1 / (h * h)));

    const double w = std::numbers::pi / 2;
    CHECK_THROWS_AS(discretize(scarf(3, 1), Grid{-w, w, 1001}), Error);
    CHECK_THROWS_AS(discretize(scarf(3, 1), Grid{-w + 1e-3, w, 1001}), Error);

    const Grid r{-15.0, 15.0, 6001};
    const auto rop = discretize(rm(), r);
    CHECK(r.x(3000) == doctest::Approx(0.0));
    CHECK(rop.diagonal(2999) == doctest::Approx(2 / (r.step() * r.step()) - 4.0));
}

TEST_CASE("two by two") {
    Eigen::VectorXd d(2), e(1);
    d << 2, 2;
    e << -1;
    const auto ev = lowest_eigenvalues(TridiagonalOperator::symmetric(d, e), 2);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0] == doctest::Approx(1.0));
    CHECK(ev[1] == doctest::Approx(3.0));
}

TEST_CASE("oscillator spectrum") {
    const auto op = discretize(harmonic(), Grid{-12.0, 12.0, 4001});
    const auto ev = lowest_eigenvalues(op, 11);
    for (int n = 0; n < 11; ++n) CHECK(std::abs(ev[n] - (2 * n + 1)) <= 1e-6 * (2 * n + 1));
    for (int n = 1; n < 11; ++n) CHECK(ev[n] > ev[n - 1]);
}

TEST_CASE("rosen_morse spectrum and count") {
    const PotentialSpec s = rm();
    const auto op = discretize(s, default_grid(s, 15.0));
    const auto ev = lowest_eigenvalues(op, 4);
    const double expected[] = {0.0, 7.0, 12.0, 15.0};
    for (int n = 0; n < 4; ++n) CHECK(std::abs(ev[n] - expected[n]) < 1e-5);
    CHECK(count_below(op, s.continuum_threshold) == *bound_state_count(s));
}

TEST_CASE("default grid keeps the tail") {
    const PotentialSpec s = rm();
    const Grid g = default_grid(s, 15.0);
    const auto wf = solve_wavefunction(s, 3);
    CHECK(std::abs(wavefunction_eval(wf, g.x_min)) < 1e-12 * wf.peak);
    CHECK(std::abs(wavefunction_eval(wf, g.x_max)) < 1e-12 * wf.peak);
    const Grid h = default_grid(harmonic(), 21.0);
    const auto hw = solve_wavefunction(harmonic(), 10);
    CHECK(std::abs(wavefunction_eval(hw, h.x_max)) < 1e-12 * hw.peak);
    const Grid sg = default_grid(scarf(3, 1), 40.0);
    CHECK(sg.x_min > -std::numbers::pi / 2);
    CHECK(sg.x_max < std::numbers::pi / 2);
}

TEST_CASE("eigenvector nodes") {
    const auto hop = discretize(harmonic(), Grid{-12.0, 12.0, 4001});
    const auto h0 = eigenvector(hop, lowest_eigenvalues(hop, 1)[0]);
    CHECK(interior_sign_changes(h0.vector) == 0);
    CHECK(h0.vector.squaredNorm() * h0.grid.step() == doctest::Approx(1.0));
    const auto h1 = eigenvector(hop, lowest_eigenvalues(hop, 2)[1]);
    CHECK(interior_sign_changes(h1.vector) == 1);
    CHECK(h1.index == 1);

    const PotentialSpec s = rm();
    const auto op = discretize(s, default_grid(s, 15.0));
    const auto pair = eigenvector(op, lowest_eigenvalues(op, 4)[3]);
    CHECK(interior_sign_changes(pair.vector) == 3);
}

TEST_CASE("overlap examples") {
    const PotentialSpec s = rm();
    const auto op = discretize(s, default_grid(s, 15.0));
    const auto ev = lowest_eigenvalues(op, 2);
    const auto p0 = eigenvector(op, ev[0], 0);
    const auto p1 = eigenvector(op, ev[1], 1);
    const auto w0 = solve_wavefunction(s, 0);
    CHECK(overlap(w0, p0) >= 1 - 1e-8);
    CHECK(overlap(w0, p1) <= 1e-6);

    OracleEigenpair own = p0;
    for (int i = 0; i < own.grid.count; ++i) own.vector(i) = wavefunction_eval(w0, own.grid.x(i));
    own.vector /= std::sqrt(own.vector.squaredNorm() * own.grid.step());
    CHECK(overlap(w0, own) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("numerov converges at fourth order") {
    for (int n : {0, 2, 4}) {
        const double exact = 2 * n + 1;
        const double coarse = lowest_eigenvalues(discretize(harmonic(), Grid{-8.0, 8.0, 201}), n + 1)[n];
        const double fine = lowest_eigenvalues(discretize(harmonic(), Grid{-8.0, 8.0, 401}), n + 1)[n];
        const double ratio = std::abs(coarse - exact) / std::abs(fine - exact);
        CHECK(ratio >= 12.0);
    }
    // the plain stencil is only second order
    const double c2 = lowest_eigenvalues(discretize(harmonic(), Grid{-8.0, 8.0, 201}, Stencil::three_point), 3)[2];
    const double f2 = lowest_eigenvalues(discretize(harmonic(), Grid{-8.0, 8.0, 401}, Stencil::three_point), 3)[2];
    CHECK(std::abs(c2 - 5.0) / std::abs(f2 - 5.0) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("sturm counts against minors and a dense solver") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
        Eigen::VectorXd d(8), e(7);
        for (int i = 0; i < 8; ++i) d(i) = u(rng);
        for (int i = 0; i < 7; ++i) e(i) = u(rng);
        const auto op = TridiagonalOperator::symmetric(d, e);
        for (int k = 0; k < 10; ++k) {
            const double E = 2.0 * u(rng);
            CHECK(count_below(op, E) == minors_count(d, e, E));
        }
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(8, 8);
        dense.diagonal() = d;
        dense.diagonal(1) = e;
        dense.diagonal(-1) = e;
        const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues();
        const auto ev = lowest_eigenvalues(op, 8);
        for (int i = 0; i < 8; ++i) CHECK(std::abs(ev[i] - ref(i)) < 1e-10);
    }
}

TEST_CASE("tridiagonal solve against a dense solve") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 12;
    Eigen::VectorXd sub(n - 1), diag(n), super(n - 1), rhs(n);
    for (int i = 0; i < n; ++i) diag(i) = 0.1 * u(rng), rhs(i) = u(rng);
    for (int i = 0; i < n - 1; ++i) sub(i) = u(rng), super(i) = u(rng);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    dense.diagonal() = diag;
    dense.diagonal(1) = super;
    dense.diagonal(-1) = sub;
    const Eigen::VectorXd ref = dense.partialPivLu().solve(rhs);
    const Eigen::VectorXd x = solve_tridiagonal(sub, diag, super, rhs);
    CHECK((x - ref).norm() < 1e-10 * ref.norm());
}

TEST_CASE("scarf oracle") {
    for (auto [A, B] : {std::pair{3.0, 1.0}, {1.0, -3.0}}) {
        const PotentialSpec s = scarf(A, B);
        const auto op = discretize(s, default_grid(s, 45.0));
        const auto ev = lowest_eigenvalues(op, 3);
        for (int n = 0; n < 3; ++n) CHECK(std::abs(ev[n] - closed_form_energy(s, n)) < 1e-5);
    }
}
