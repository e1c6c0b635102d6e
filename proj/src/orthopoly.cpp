#include "qhj/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qhj {

bool jacobi_recurrence_regular(int n, double a, double b) {
    for (int k = 2; k <= n; ++k) {
        const double s = 2.0 * k + a + b;
        if (std::abs(2.0 * k * (k + a + b) * (s - 2.0)) < 1e-300) return false;
    }
    return true;
}

double jacobi_leading_coefficient(int n, double a, double b) {
    double c = 1.0;
    for (int j = 1; j <= n; ++j) c *= (n + a + b + j) / (2.0 * j);
    return c;
}

double termination_residual(const PolynomialOde& ode, int n) {
    return ode.lambda0 + n * ode.tau[1] + n * (n - 1.0) * ode.sigma[2];
}

namespace {

double ode_scale(const PolynomialOde& ode, int n) {
    return std::max({1.0, std::abs(ode.lambda0), std::abs(n * ode.tau[1]), std::abs(n * (n - 1.0) * ode.sigma[2])});
}

}  // namespace

Poly<double> frobenius_polynomial(const PolynomialOde& ode, int n) {
    if (ode.sigma.is_zero()) throw Error(ErrorCode::no_polynomial_solution, "sigma is identically zero");
    if (ode.sigma.degree() > 2 || ode.tau.degree() > 1)
        throw Error(ErrorCode::no_polynomial_solution, "sigma must have degree <= 2 and tau degree <= 1");
    if (n < 0) throw Error(ErrorCode::no_polynomial_solution, "negative degree");

    const double scale = ode_scale(ode, n);
    const double g = termination_residual(ode, n);
    if (std::abs(g) > 1e-8 * scale) {
        std::ostringstream msg;
        msg << "termination condition fails for n=" << n << " (residual " << g << ")";
        throw Error(ErrorCode::no_polynomial_solution, msg.str());
    }

    const double s0 = ode.sigma[0], s1 = ode.sigma[1], s2 = ode.sigma[2];
    const double t0 = ode.tau[0], t1 = ode.tau[1];
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 3);
    c(n) = 1.0;
    for (int j = n - 1; j >= 0; --j) {
        const double diag = s2 * j * (j - 1.0) + t1 * j + ode.lambda0;
        const double rhs = -(s0 * (j + 2.0) * (j + 1.0) * c(j + 2) + (s1 * (j + 1.0) * j + t0 * (j + 1.0)) * c(j + 1));
        if (std::abs(diag) <= 1e-12 * scale) {
            if (std::abs(rhs) > 1e-9 * scale * c.cwiseAbs().maxCoeff())
                throw Error(ErrorCode::no_polynomial_solution, "recursion is inconsistent at a degenerate order");
            c(j) = 0.0;
        } else {
            c(j) = rhs / diag;
        }
    }
    Poly<double> p(Eigen::VectorXd(c.head(n + 1)));

    // Residual check at 2n + 3 Chebyshev points of [-1, 1].
    const Poly<double> dp = p.derivative();
    const Poly<double> ddp = dp.derivative();
    // Relative to the ODE scale times |P| so that a near-zero lambda0 at n = 0 passes.
    const int samples = 2 * n + 3;
    for (int k = 0; k < samples; ++k) {
        const double y = std::cos(std::numbers::pi * (k + 0.5) / samples);
        const double terms[] = {ode.sigma(y) * ddp(y), ode.tau(y) * dp(y), ode.lambda0 * p(y)};
        const double size = std::abs(terms[0]) + std::abs(terms[1]) + std::abs(terms[2]);
        const double ref = std::max(size, scale * c.head(n + 1).cwiseAbs().maxCoeff());
        if (std::abs(terms[0] + terms[1] + terms[2]) > 1e-9 * ref)
            throw Error(ErrorCode::no_polynomial_solution, "polynomial solution fails the residual check");
    }
    return p;
}

QuadratureRule gauss_legendre(int points) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(points);
    Eigen::VectorXd sub(std::max(points - 1, 0));
    for (int k = 1; k < points; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    QuadratureRule rule;
    rule.nodes = solver.eigenvalues();
    rule.weights = 2.0 * solver.eigenvectors().row(0).transpose().array().square();
    return rule;
}

}  // namespace qhj
