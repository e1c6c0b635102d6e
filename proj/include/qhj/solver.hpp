#pragma once

// Quantum Hamilton-Jacobi bound-state solver.
//
// With y = f(x), F(y) = f'(x(y)) and psi(y) = F^(-1/2) exp(int chi dy) the
// Schrodinger equation becomes the Riccati equation
//
//     chi^2 + chi' + R(y) = 0,   R = (E - V)/F^2 - (F'/F)'/2 - (F'/F)^2/4.
//
// chi is fixed by its principal parts: residues b_i at the fixed poles of R,
// unit residues at the n zeros of psi (collected as P'/P) and an analytic
// part h(y) read off at infinity.  Substituting chi = h + sum b_i/(y - y_i)
// + P'/P gives sigma P'' + tau P' + lambda0 P = 0, and a degree-n polynomial
// solution exists only where the termination condition holds.

#include <optional>
#include <utility>
#include <vector>

#include "qhj/catalog.hpp"
#include "qhj/orthopoly.hpp"
#include "qhj/polyrat.hpp"

namespace qhj {

/// q = F phi, chi = phi + (1/2) d(ln F)/dy, kept so psi can be rebuilt.
struct TransformRecord {
    RationalFn<Rational> f_squared;
    RationalFn<Rational> f_log_derivative;
};

template <typename Scalar>
struct ChiEquation {
    RationalFn<Scalar> coefficient;  ///< R(y)
    Scalar energy{};
    /// Principal parts of R at the catalog's fixed poles, in catalog order.
    std::vector<LaurentData<Scalar>> fixed_pole_data;
    TransformRecord transform;
};

/// Exact R(y) at the given energy (every double is an exact rational).
RationalFn<Rational> chi_coefficient_exact(const PotentialSpec& spec, const Rational& energy);

/// Scalar is double or Rational; R is assembled in exact arithmetic either way.
template <typename Scalar>
ChiEquation<Scalar> build_chi_equation(const PotentialSpec& spec, const Scalar& energy);

/// The two roots of b^2 - b + r2 = 0 at a fixed pole.
struct ResiduePair {
    double pole = 0.0;
    double root_plus = 0.0;
    double root_minus = 0.0;
};

/// Throws ComplexResidues when 1 - 4 r2 < 0.
template <typename Scalar>
ResiduePair fixed_pole_residues(const ChiEquation<Scalar>& eq, double pole);

struct ResidueSet {
    /// (pole, residue) in catalog order.
    std::vector<std::pair<double, double>> chosen;
    double constant_C = 0.0;
    ResidueRule selection_rule = ResidueRule::normalizability;
    /// Exactly one residue combination gives positive prefactor exponents.
    bool unique_normalizable = true;

    double residue_at(double pole) const;
};

/// Picks the physical residue at every fixed pole: susy_limit (branch that
/// reproduces exp(-int W) at E = 0), hbar_limit (branch with positive hbar -> 0
/// limit), cross-checked against normalizability.  Throws NoPhysicalSelection.
ResidueSet select_residues(const PotentialSpec& spec, const std::vector<ResiduePair>& pairs, double energy);

/// Residue pairs at every catalog pole plus the selection, at energy E.
ResidueSet physical_residues(const PotentialSpec& spec, double energy);

template <typename Scalar>
struct ReducedEquation {
    Poly<Scalar> sigma;
    Poly<Scalar> tau;
    Scalar lambda0{};
    /// Analytic part h(y) of chi; constant_C is its constant term.
    Poly<Scalar> analytic_part;
    Scalar constant_C{};
    /// Matching residual at infinity that pins C (coefficient of 1/y for
    /// decaying R, of y^m for R ~ y^(2m)); zero when C is consistent.
    Scalar large_y_residual{};
    /// Relative size of the non-constant leftover after substitution.
    double consistency_residual = 0.0;

    PolynomialOde ode() const;
};

/// Analytic part of chi from the behaviour of R at infinity (decaying branch).
template <typename Scalar>
Poly<Scalar> analytic_part(const Poly<Scalar>& r_num, const Poly<Scalar>& r_den);

/// residues are in catalog pole order.  Throws InconsistentReduction when the
/// substituted equation leaves non-constant terms.
template <typename Scalar>
ReducedEquation<Scalar> reduce_to_polynomial_ode(const ChiEquation<Scalar>& eq, const std::vector<Scalar>& residues,
                                                 int n);

ReducedEquation<double> reduce_to_polynomial_ode(const ChiEquation<double>& eq, const ResidueSet& residues, int n);

/// lambda0(E) + n tau'(E) + n(n-1) sigma''/2 for one level, evaluated without
/// rebuilding R: R(E) = R(0) + E (R(1) - R(0)) is precomputed over (prod (y - y_i))^2.
class TerminationFunction {
public:
    TerminationFunction(const PotentialSpec& spec, int n);

    /// nullopt where the residues are complex or no physical selection exists.
    std::optional<double> operator()(double energy) const;

private:
    const PotentialSpec* spec_;
    int n_;
    Poly<double> base_numerator_;
    Poly<double> energy_numerator_;
    Poly<double> pole_product_;
    std::vector<double> r2_base_;
    std::vector<double> r2_energy_;
    std::vector<int> branch_signs_;  // susy_limit: +1 root_plus, -1 root_minus
};

struct SpectralLine {
    int n = 0;
    double energy_qhj = 0.0;
    double energy_closed_form = 0.0;
    std::optional<double> lambda_scaled;
    double constant_C = 0.0;
    double large_y_residual = 0.0;
};

/// Scans the termination function for a sign change (400 brackets per unit
/// energy, doubled up to three times), bisects to 1e-12, then re-derives the
/// reduced equation at the root to confirm C and the cancellation.
SpectralLine solve_level(const PotentialSpec& spec, int n);

enum class PolynomialFamily { hermite, jacobi, general };

struct ClosedFormWavefunction {
    PotentialKind kind = PotentialKind::harmonic;
    int level = 0;
    double energy = 0.0;
    /// (pole, exponent): psi contains (1 - y/pole)^exponent.
    std::vector<std::pair<double, double>> exponents;
    /// psi contains exp(-gaussian_exponent * y^2 / 2).
    std::optional<double> gaussian_exponent;
    Poly<double> polynomial;  ///< monic P(y)
    PolynomialFamily family = PolynomialFamily::general;
    JacobiIndices indices;
    double norm = 1.0;  ///< signed; psi > 0 next to the left end of the domain
    double peak = 1.0;  ///< max |psi| on the physical line
    ChangeOfVariable change;
    Interval x_domain;
};

/// Throws NotNormalizable when an exponent is not positive.
ClosedFormWavefunction assemble_wavefunction(const PotentialSpec& spec, const SpectralLine& line,
                                             const ResidueSet& residues);

/// solve_level + residue selection + assembly.
ClosedFormWavefunction solve_wavefunction(const PotentialSpec& spec, int n);

/// Monic P(y) and P'(y); recurrence evaluation for classical families.
std::pair<Complex, Complex> polynomial_with_derivative(const ClosedFormWavefunction& wf, Complex y);

/// psi at complex x by continuation of y(x).  Throws BranchCut when a
/// prefactor base lands on the negative real axis.
Complex wavefunction_eval(const ClosedFormWavefunction& wf, Complex x);
double wavefunction_eval(const ClosedFormWavefunction& wf, double x);

/// d(ln psi)/dx from the closed form (meromorphic, no branch cuts).
Complex log_derivative(const ClosedFormWavefunction& wf, Complex x);

/// Integral of psi_a psi_b over the physical domain (double-exponential quadrature).
double inner_product(const ClosedFormWavefunction& a, const ClosedFormWavefunction& b);

}  // namespace qhj
