#pragma once

// Finite-difference Schrodinger eigensolver used as an independent check:
// -psi'' + V psi = E psi on a uniform grid with Dirichlet ends, eigenvalues by
// Sturm counting + bisection, eigenvectors by shifted inverse iteration.

#include <vector>

#include <Eigen/Core>

#include "qhj/catalog.hpp"

namespace qhj {

struct ClosedFormWavefunction;

namespace oracle {

/// Uniform grid; the two end nodes carry the Dirichlet condition.
struct Grid {
    double x_min = 0.0;
    double x_max = 0.0;
    int count = 0;

    double step() const { return (x_max - x_min) / (count - 1); }
    double x(int i) const { return x_min + i * step(); }
};

enum class Stencil { three_point, numerov };

/// Interior-node operator.  diagonal/off_diagonal are the symmetric 3-point
/// entries 2/h^2 + V_i and -1/h^2.  With the Numerov stencil the eigenproblem
/// is the pencil T(E) = A - E B, B = tridiag(1, 10, 1)/12, built from the
/// stored potential samples.
struct TridiagonalOperator {
    Eigen::VectorXd diagonal;
    Eigen::VectorXd off_diagonal;
    Eigen::VectorXd potential;
    double step = 1.0;
    Stencil stencil = Stencil::three_point;
    Grid grid;

    Eigen::Index dimension() const { return diagonal.size(); }

    /// A plain symmetric tridiagonal matrix (no grid behind it).
    static TridiagonalOperator symmetric(Eigen::VectorXd diagonal, Eigen::VectorXd off_diagonal);
};

struct OracleEigenpair {
    int index = 0;
    double energy = 0.0;
    Eigen::VectorXd vector;  ///< one value per grid node, end nodes zero
    Grid grid;
};

/// Throws DomainViolation when a node touches a wall or lies outside x_domain,
/// or when V is so large that the Numerov off-diagonals change sign.
TridiagonalOperator discretize(const PotentialSpec& spec, const Grid& grid, Stencil stencil = Stencil::numerov);

/// Box for levels up to max_energy: for line domains the half-width is the
/// largest of 12, three times the outer turning point, and the turning point
/// plus the distance over which exp(-kappa x) falls to 1e-12; for walls, a
/// few steps in from each wall.  count = 0 picks a step of about 0.005.
Grid default_grid(const PotentialSpec& spec, double max_energy, int count = 0);

/// Number of eigenvalues strictly below E.
int count_below(const TridiagonalOperator& op, double energy);

/// k smallest eigenvalues, bisected to 1e-12.
std::vector<double> lowest_eigenvalues(const TridiagonalOperator& op, int k);

/// Inverse iteration at energy + 1e-8 until the relative residual drops below
/// 1e-10.  Sign: first significant component positive; sum v^2 h = 1.
/// Throws ConvergenceFailure after 100 iterations.
OracleEigenpair eigenvector(const TridiagonalOperator& op, double energy, int index = -1);

/// |sum psi(x_i) v_i h|
double overlap(const ClosedFormWavefunction& wf, const OracleEigenpair& pair);

/// Solves the tridiagonal system with partial pivoting (sub, diag, super).
Eigen::VectorXd solve_tridiagonal(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd super,
                                  Eigen::VectorXd rhs);

}  // namespace oracle
}  // namespace qhj
