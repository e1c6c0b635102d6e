#include "qhj/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qhj/solver.hpp"

namespace qhj::oracle {

TridiagonalOperator TridiagonalOperator::symmetric(Eigen::VectorXd diagonal, Eigen::VectorXd off_diagonal) {
    TridiagonalOperator op;
    op.diagonal = std::move(diagonal);
    op.off_diagonal = std::move(off_diagonal);
    op.potential = Eigen::VectorXd::Zero(op.diagonal.size());
    op.stencil = Stencil::three_point;
    return op;
}

TridiagonalOperator discretize(const PotentialSpec& spec, const Grid& grid, Stencil stencil) {
    if (grid.count < 3) throw Error(ErrorCode::domain_violation, "grid needs at least 3 nodes");
    if (!(grid.x_min > spec.x_domain.lower) || !(grid.x_max < spec.x_domain.upper)) {
        std::ostringstream msg;
        msg << "grid [" << grid.x_min << ", " << grid.x_max << "] touches the boundary of the domain ("
            << spec.x_domain.lower << ", " << spec.x_domain.upper << ")";
        throw Error(ErrorCode::domain_violation, msg.str());
    }
    const int m = grid.count - 2;
    const double h = grid.step();
    TridiagonalOperator op;
    op.step = h;
    op.stencil = stencil;
    op.grid = grid;
    op.potential.resize(m);
    for (int i = 0; i < m; ++i) {
        const double v = spec.potential(grid.x(i + 1));
        if (!std::isfinite(v)) throw Error(ErrorCode::domain_violation, "potential is not finite on the grid");
        op.potential(i) = v;
    }
    op.diagonal = op.potential.array() + 2.0 / (h * h);
    op.off_diagonal = Eigen::VectorXd::Constant(std::max(m - 1, 0), -1.0 / (h * h));
    if (stencil == Stencil::numerov && op.potential.maxCoeff() * h * h / 12.0 >= 0.5)
        throw Error(ErrorCode::domain_violation, "grid too close to a wall for the Numerov stencil");
    return op;
}

namespace {

// Outermost |x| with V(x) <= E (scan of the line).
double turning_extent(const PotentialSpec& spec, double energy) {
    double ext = 0.0;
    for (int i = -40000; i <= 40000; ++i) {
        const double x = 0.005 * i;
        if (spec.potential(x) <= energy) ext = std::max(ext, std::abs(x));
    }
    return ext;
}

struct Bands {
    Eigen::VectorXd sub, diag, super;
};

// T(E) for the stencil; sub(i) couples row i+1 to column i.
Bands shifted(const TridiagonalOperator& op, double energy) {
    const Eigen::Index m = op.dimension();
    Bands t;
    if (op.stencil == Stencil::three_point) {
        t.diag = op.diagonal.array() - energy;
        t.sub = op.off_diagonal;
        t.super = op.off_diagonal;
        return t;
    }
    const double h2 = op.step * op.step;
    const Eigen::ArrayXd f = op.potential.array() - energy;
    t.diag = 2.0 / h2 + (10.0 / 12.0) * f;
    t.super = (-1.0 / h2 + f.tail(m - 1) / 12.0).matrix();
    t.sub = (-1.0 / h2 + f.head(m - 1) / 12.0).matrix();
    return t;
}

double lower_bound(const TridiagonalOperator& op) {
    if (op.stencil == Stencil::numerov) return op.potential.minCoeff() - 1.0;
    double lo = op.diagonal(0) - 1.0;
    for (Eigen::Index i = 0; i < op.dimension(); ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(op.off_diagonal(i - 1));
        if (i + 1 < op.dimension()) r += std::abs(op.off_diagonal(i));
        lo = std::min(lo, op.diagonal(i) - r);
    }
    return lo - 1.0;
}

}  // namespace

Grid default_grid(const PotentialSpec& spec, double max_energy, int count) {
    if (spec.x_domain.finite()) {
        // Smallest per-side margin (in steps) keeping V h^2 / 12 below 1/4 at the end nodes.
        const int n = count > 0 ? count : 4001;
        const double w = spec.x_domain.upper - spec.x_domain.lower;
        int left = 1, right = 1;
        for (int it = 0; it < 10000; ++it) {
            const double h = w / (n - 1 + left + right);
            const Grid g{spec.x_domain.lower + left * h, spec.x_domain.upper - right * h, n};
            const bool left_ok = spec.potential(g.x_min) * h * h / 12.0 < 0.25;
            const bool right_ok = spec.potential(g.x_max) * h * h / 12.0 < 0.25;
            if (left_ok && right_ok) return g;
            left += !left_ok;
            right += !right_ok;
            if (left + right > n / 2) break;
        }
        throw Error(ErrorCode::domain_violation, "cannot place a Numerov grid inside the walls");
    }
    const double x_turn = turning_extent(spec, max_energy);
    double half = std::max(12.0, 3.0 * x_turn);
    if (std::isfinite(spec.continuum_threshold)) {
        const double kappa = std::sqrt(std::max(spec.continuum_threshold - max_energy, 1e-6));
        half = std::max(half, x_turn + std::log(1e12) / kappa);
    }
    const int n = count > 0 ? count : std::max(4001, static_cast<int>(std::ceil(2.0 * half / 0.005)) + 1);
    return Grid{-half, half, n};
}

int count_below(const TridiagonalOperator& op, double energy) {
    const Bands t = shifted(op, energy);
    int negatives = 0;
    double d = 0.0;
    for (Eigen::Index i = 0; i < op.dimension(); ++i) {
        d = i == 0 ? t.diag(0) : t.diag(i) - t.super(i - 1) * t.sub(i - 1) / d;
        if (d == 0.0) d = -1e-300;  // E sits on an eigenvalue of a leading block
        if (d < 0.0) ++negatives;
    }
    return negatives;
}

std::vector<double> lowest_eigenvalues(const TridiagonalOperator& op, int k) {
    k = std::min<int>(k, static_cast<int>(op.dimension()));
    double lo = lower_bound(op);
    while (count_below(op, lo) > 0) lo -= 2.0 * std::abs(lo) + 1.0;
    double hi = lo + 1.0;
    while (count_below(op, hi) < k) hi = lo + 2.0 * (hi - lo);

    std::vector<double> out;
    for (int j = 0; j < k; ++j) {
        // smallest E with count_below(E) > j
        double a = j == 0 ? lo : out.back(), b = hi;
        while (b - a > 1e-12) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (count_below(op, mid) > j) b = mid;
            else a = mid;
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

Eigen::VectorXd solve_tridiagonal(Eigen::VectorXd dl, Eigen::VectorXd d, Eigen::VectorXd du, Eigen::VectorXd b) {
    const Eigen::Index n = d.size();
    Eigen::VectorXd du2 = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 2, 0));
    const double tiny = 1e-300;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (std::abs(d(i)) >= std::abs(dl(i))) {
            if (d(i) == 0.0) d(i) = tiny;
            const double fact = dl(i) / d(i);
            d(i + 1) -= fact * du(i);
            b(i + 1) -= fact * b(i);
        } else {
            const double fact = d(i) / dl(i);
            d(i) = dl(i);
            const double temp = d(i + 1);
            d(i + 1) = du(i) - fact * temp;
            if (i + 2 < n) {
                du2(i) = du(i + 1);
                du(i + 1) = -fact * du2(i);
            }
            du(i) = temp;
            const double tb = b(i);
            b(i) = b(i + 1);
            b(i + 1) = tb - fact * b(i + 1);
        }
    }
    if (d(n - 1) == 0.0) d(n - 1) = tiny;
    Eigen::VectorXd x(n);
    x(n - 1) = b(n - 1) / d(n - 1);
    if (n >= 2) x(n - 2) = (b(n - 2) - du(n - 2) * x(n - 1)) / d(n - 2);
    for (Eigen::Index i = n - 3; i >= 0; --i) x(i) = (b(i) - du(i) * x(i + 1) - du2(i) * x(i + 2)) / d(i);
    return x;
}

OracleEigenpair eigenvector(const TridiagonalOperator& op, double energy, int index) {
    const Eigen::Index m = op.dimension();
    const bool numerov = op.stencil == Stencil::numerov;
    const auto apply_b = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        if (!numerov) return v;
        Eigen::VectorXd out = (10.0 / 12.0) * v;
        out.head(m - 1) += v.tail(m - 1) / 12.0;
        out.tail(m - 1) += v.head(m - 1) / 12.0;
        return out;
    };
    const auto apply_t = [&](const Bands& t, const Eigen::VectorXd& v) -> Eigen::VectorXd {
        Eigen::VectorXd out = t.diag.cwiseProduct(v);
        out.head(m - 1) += t.super.cwiseProduct(v.tail(m - 1));
        out.tail(m - 1) += t.sub.cwiseProduct(v.head(m - 1));
        return out;
    };

    const Bands shifted_t = shifted(op, energy + 1e-8);
    const Bands exact_t = shifted(op, energy);
    const double scale = exact_t.diag.cwiseAbs().maxCoeff() + 2.0 * exact_t.super.cwiseAbs().maxCoeff();

    Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
    v /= v.norm();
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd next = solve_tridiagonal(shifted_t.sub, shifted_t.diag, shifted_t.super, apply_b(v));
        next /= next.norm();
        v = next;
        const double residual = apply_t(exact_t, v).norm() / scale;
        if (residual < 1e-10) {
            converged = true;
            break;
        }
    }
    if (!converged) throw Error(ErrorCode::convergence_failure, "inverse iteration did not converge in 100 steps");

    OracleEigenpair pair;
    pair.index = index >= 0 ? index : count_below(op, energy - 1e-9);
    pair.energy = energy;
    pair.grid = op.grid;
    pair.vector = Eigen::VectorXd::Zero(m + 2);
    pair.vector.segment(1, m) = v;
    pair.vector /= std::sqrt(pair.vector.squaredNorm() * op.step);
    const double big = pair.vector.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < pair.vector.size(); ++i) {
        if (std::abs(pair.vector(i)) > 1e-3 * big) {
            if (pair.vector(i) < 0) pair.vector = -pair.vector;
            break;
        }
    }
    return pair;
}

double overlap(const ClosedFormWavefunction& wf, const OracleEigenpair& pair) {
    const double h = pair.grid.step();
    double s = 0.0;
    for (int i = 0; i < pair.grid.count; ++i) s += wavefunction_eval(wf, pair.grid.x(i)) * pair.vector(i);
    return std::abs(s * h);
}

}  // namespace qhj::oracle
