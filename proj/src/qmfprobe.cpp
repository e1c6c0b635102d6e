#include "qhj/qmfprobe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qhj::probe {

namespace {

constexpr Complex I{0.0, 1.0};

// |P(y)| small next to sum |c_k| |y|^k means a zero of psi.
bool near_zero_of_polynomial(const ClosedFormWavefunction& wf, Complex y) {
    const Complex p = polynomial_with_derivative(wf, y).first;
    double scale = 0.0, power = 1.0;
    const auto& c = wf.polynomial.coeffs();
    for (Eigen::Index k = 0; k < c.size(); ++k, power *= std::abs(y)) scale += std::abs(c(k)) * power;
    return std::abs(p) <= 1e-12 * scale;
}

}  // namespace

QmfSample qmf_eval(const ClosedFormWavefunction& wf, Complex x) {
    const Complex y = wf.change.y_of_x(x);
    for (const auto& [pole, e] : wf.exponents) {
        if (std::abs(1.0 - y / pole) <= 1e-12) {
            std::ostringstream msg;
            msg << "x=" << x << " sits on the fixed singularity y=" << pole;
            throw Error(ErrorCode::at_pole, msg.str());
        }
    }
    if (near_zero_of_polynomial(wf, y)) {
        std::ostringstream msg;
        msg << "psi vanishes at x=" << x;
        throw Error(ErrorCode::at_pole, msg.str());
    }
    return {x, -I * log_derivative(wf, x)};
}

MovingPoleReport locate_moving_poles(const ClosedFormWavefunction& wf) {
    MovingPoleReport out;
    out.expected_count = wf.level;

    double lo = wf.change.y_domain.lower, hi = wf.change.y_domain.upper;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        // Cauchy bound for the monic polynomial.
        double bound = 1.0;
        for (Eigen::Index k = 0; k + 1 < wf.polynomial.coeffs().size(); ++k)
            bound = std::max(bound, 1.0 + std::abs(wf.polynomial.coeffs()(k)));
        if (!std::isfinite(lo)) lo = -bound;
        if (!std::isfinite(hi)) hi = bound;
    }
    std::vector<double> ys = real_roots(wf.polynomial, lo, hi, 1e-12);
    ys.erase(std::remove_if(ys.begin(), ys.end(), [&](double y) { return !(y > lo && y < hi); }), ys.end());

    for (double y : ys) {
        // Newton polish with the recurrence evaluation
        for (int it = 0; it < 5; ++it) {
            const auto [p, dp] = polynomial_with_derivative(wf, Complex(y));
            if (dp.real() == 0.0) break;
            const double step = p.real() / dp.real();
            if (!std::isfinite(step) || std::abs(step) > 1e-6) break;
            y -= step;
        }
        const double a = wf.change.x_of_y(y);
        const auto r = [&](double h) { return h * qmf_eval(wf, Complex(a + h)).p; };
        const Complex r1 = r(1e-4), r2 = r(1e-5);
        out.locations.push_back(a);
        out.residues.push_back((10.0 * r2 - r1) / 9.0);
    }
    if (static_cast<int>(out.locations.size()) != wf.level) {
        std::ostringstream msg;
        msg << "found " << out.locations.size() << " zeros of psi, expected " << wf.level;
        throw Error(ErrorCode::count_mismatch, msg.str());
    }
    return out;
}

std::pair<double, double> turning_points(const PotentialSpec& spec, double energy) {
    if (!(energy > spec.min_potential)) {
        std::ostringstream msg;
        msg << "E=" << energy << " is not above min V=" << spec.min_potential;
        throw Error(ErrorCode::no_turning_points, msg.str());
    }
    const auto& V = spec.potential;

    // Locate the well bottom.
    double lo, hi;
    if (spec.x_domain.finite()) {
        const double w = spec.x_domain.upper - spec.x_domain.lower;
        lo = spec.x_domain.lower + 1e-9 * w;
        hi = spec.x_domain.upper - 1e-9 * w;
    } else {
        lo = -50.0;
        hi = 50.0;
    }
    double x0 = 0.0, best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 20000; ++i) {
        const double x = lo + (hi - lo) * i / 20000.0;
        const double v = V(x);
        if (v < best) best = v, x0 = x;
    }
    if (!(V(x0) < energy)) throw Error(ErrorCode::no_turning_points, "E is not above the well bottom");

    const auto outward = [&](double dir) {
        double inside = x0, step = 1e-3 * (hi - lo);
        double limit = spec.x_domain.finite() ? (dir > 0 ? hi : lo) : dir * 1e4;
        double x = x0;
        while (true) {
            double next = x + dir * step;
            if ((dir > 0 && next >= limit) || (dir < 0 && next <= limit)) {
                if (spec.x_domain.finite()) next = limit;
                else throw Error(ErrorCode::no_turning_points, "V never rises above E on one side");
            }
            if (V(next) > energy) {
                double a = inside, b = next;
                while (std::abs(b - a) > 1e-10) {
                    const double mid = 0.5 * (a + b);
                    if (V(mid) > energy) b = mid;
                    else a = mid;
                }
                return 0.5 * (a + b);
            }
            if (next == limit) throw Error(ErrorCode::no_turning_points, "V never rises above E on one side");
            inside = x = next;
            if (!spec.x_domain.finite()) step *= 1.05;
        }
    };
    return {outward(-1.0), outward(1.0)};
}

ContourSpec default_contour(const PotentialSpec& spec, const ClosedFormWavefunction& wf) {
    const auto [x1, x2] = turning_points(spec, wf.energy);
    const double w = x2 - x1;
    ContourSpec c;
    c.re_min = x1 - 0.2 * w;
    c.re_max = x2 + 0.2 * w;
    c.im_half_height = 0.25 * w;
    if (std::isfinite(spec.complex_singularity_height))
        c.im_half_height = std::min(c.im_half_height, 0.5 * spec.complex_singularity_height);
    if (spec.x_domain.finite()) {
        // keep clear of the walls and the vertical cuts through them
        const double gap = 0.5 * std::min(x1 - spec.x_domain.lower, spec.x_domain.upper - x2);
        c.re_min = std::max(c.re_min, spec.x_domain.lower + gap);
        c.re_max = std::min(c.re_max, spec.x_domain.upper - gap);
    }
    return c;
}

Complex quantization_integral(const ClosedFormWavefunction& wf, const ContourSpec& contour) {
    const Complex corners[] = {
        {contour.re_min, -contour.im_half_height},
        {contour.re_max, -contour.im_half_height},
        {contour.re_max, contour.im_half_height},
        {contour.re_min, contour.im_half_height},
    };
    const int n = contour.samples_per_side;
    Complex total = 0.0;
    for (int side = 0; side < 4; ++side) {
        const Complex a = corners[side], b = corners[(side + 1) % 4];
        const Complex dz = (b - a) / static_cast<double>(n);
        Complex sum = 0.0;
        for (int k = 0; k <= n; ++k) {
            const Complex z = a + static_cast<double>(k) * dz;
            Complex p;
            try {
                p = qmf_eval(wf, z).p;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::at_pole) throw;
                throw Error(ErrorCode::contour_through_pole, e.what());
            }
            sum += (k == 0 || k == n) ? 0.5 * p : p;
        }
        total += sum * dz;
    }
    return total / (2.0 * std::numbers::pi);
}

Complex qhj_residual(const PotentialSpec& spec, const ClosedFormWavefunction& wf, double x, double step) {
    const Complex p = qmf_eval(wf, Complex(x)).p;
    const Complex dp = (qmf_eval(wf, Complex(x + step)).p - qmf_eval(wf, Complex(x - step)).p) / (2.0 * step);
    return p * p - I * dp - (wf.energy - spec.potential(x));
}

}  // namespace qhj::probe
