#pragma once

// Quantum momentum function p = -i psi'/psi of an assembled state: moving
// poles at the zeros of psi, their residues, and the contour integral
// (1/2 pi) \oint p dx that counts them.

#include <utility>
#include <vector>

#include "qhj/solver.hpp"

namespace qhj::probe {

struct QmfSample {
    Complex x;
    Complex p;
};

/// Analytic log-derivative of the closed form.  Throws AtPole when the
/// polynomial factor (or a prefactor) vanishes to 1e-12 of its local scale.
QmfSample qmf_eval(const ClosedFormWavefunction& wf, Complex x);

struct MovingPoleReport {
    std::vector<double> locations;
    std::vector<Complex> residues;
    int expected_count = 0;
};

/// Real zeros of P inside the physical domain (Sturm + bisection, Newton
/// polish), residues lim (x - a) p(x) by Richardson over offsets 1e-4, 1e-5.
/// Throws CountMismatch when the count differs from n.
MovingPoleReport locate_moving_poles(const ClosedFormWavefunction& wf);

struct ContourSpec {
    double re_min = -1.0;
    double re_max = 1.0;
    double im_half_height = 0.5;
    int samples_per_side = 4000;
};

/// Turning points, in x.  Throws NoTurningPoints when E <= min V or when a
/// side never rises above E.
std::pair<double, double> turning_points(const PotentialSpec& spec, double energy);

/// [x1 - 0.2 w, x2 + 0.2 w] x (+-0.25 w), w = x2 - x1; the height shrinks to
/// half the distance of the nearest complex singularity and the real extent
/// stays clear of walls.
ContourSpec default_contour(const PotentialSpec& spec, const ClosedFormWavefunction& wf);

/// (1/2 pi) \oint p dx, trapezoid rule on the rectangle, counter-clockwise.
/// Throws ContourThroughPole if a sample lands on a zero of psi.
Complex quantization_integral(const ClosedFormWavefunction& wf, const ContourSpec& contour);

/// p^2 - i p' - (E - V) at real x, p' by central differences.
Complex qhj_residual(const PotentialSpec& spec, const ClosedFormWavefunction& wf, double x, double step = 1e-6);

}  // namespace qhj::probe
