#pragma once

#include <cmath>

#include <Eigen/Core>

#include "qhj/polyrat.hpp"

namespace qhj {

/// sigma(y) P'' + tau(y) P' + lambda0 P = 0 with deg sigma <= 2, deg tau <= 1.
struct PolynomialOde {
    Poly<double> sigma;
    Poly<double> tau;
    double lambda0 = 0.0;
};

/// Superscripts (a, b) of P_n^{(a,b)}.
struct JacobiIndices {
    double a = 0.0;
    double b = 0.0;
};

/// Physicists' Hermite H_n by the three-term recurrence.
template <typename T>
T hermite_eval(int n, const T& x) {
    if (n == 0) return T(1);
    T prev = T(1);
    T cur = T(2) * x;
    for (int k = 1; k < n; ++k) {
        T next = T(2) * x * cur - T(2.0 * k) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

template <typename T>
T hermite_derivative(int n, const T& x) {
    return n == 0 ? T(0) : T(2.0 * n) * hermite_eval(n - 1, x);
}

/// P_n^{(a,b)}(x) by the standard three-term recurrence.  Index combinations
/// that zero a recurrence denominator (a + b a small negative integer) are
/// not supported; `jacobi_recurrence_regular` reports them.
template <typename T>
T jacobi_eval(int n, double a, double b, const T& x) {
    if (n == 0) return T(1);
    T prev = T(1);
    T cur = T(0.5 * (a - b)) + T(0.5 * (a + b + 2.0)) * x;
    for (int k = 2; k <= n; ++k) {
        const double s = 2.0 * k + a + b;
        const double c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        const double c2 = (s - 1.0) * (a * a - b * b);
        const double c3 = (s - 1.0) * s * (s - 2.0);
        const double c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        T next = ((T(c2) + T(c3) * x) * cur - T(c4) * prev) / T(c1);
        prev = cur;
        cur = next;
    }
    return cur;
}

/// d/dx P_n^{(a,b)} = (n + a + b + 1)/2 * P_{n-1}^{(a+1,b+1)}
template <typename T>
T jacobi_derivative(int n, double a, double b, const T& x) {
    if (n == 0) return T(0);
    return T(0.5 * (n + a + b + 1.0)) * jacobi_eval(n - 1, a + 1.0, b + 1.0, x);
}

bool jacobi_recurrence_regular(int n, double a, double b);

/// Leading coefficient (n + a + b + 1)_n / (2^n n!) of P_n^{(a,b)}.
double jacobi_leading_coefficient(int n, double a, double b);

/// lambda0 + n tau' + n (n - 1) sigma'' / 2: zero iff a degree-n polynomial solution exists.
double termination_residual(const PolynomialOde& ode, int n);

/// Monic degree-n polynomial solution, built coefficient by coefficient from
/// the top.  Throws NoPolynomialSolution when the termination condition fails
/// (relative 1e-8) or the recursion is inconsistent.
Poly<double> frobenius_polynomial(const PolynomialOde& ode, int n);

/// Gauss-Legendre rule on [-1, 1] from the Golub-Welsch eigenproblem.
struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

QuadratureRule gauss_legendre(int points);

}  // namespace qhj
