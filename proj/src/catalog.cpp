#include "qhj/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace qhj {

std::string_view to_string(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::harmonic: return "harmonic";
        case PotentialKind::rosen_morse: return "rosen_morse";
        case PotentialKind::scarf1: return "scarf1";
    }
    return "unknown";
}

std::string_view to_string(SusyPhase phase) {
    switch (phase) {
        case SusyPhase::exact: return "exact";
        case SusyPhase::broken: return "broken";
        case SusyPhase::exact_swapped: return "exact_swapped";
        case SusyPhase::broken_mirror: return "broken_mirror";
        case SusyPhase::not_applicable: return "not_applicable";
    }
    return "unknown";
}

std::string_view to_string(ResidueRule rule) {
    switch (rule) {
        case ResidueRule::susy_limit: return "susy_limit";
        case ResidueRule::hbar_limit: return "hbar_limit";
        case ResidueRule::normalizability: return "normalizability";
    }
    return "unknown";
}

PotentialKind potential_kind_from_name(std::string_view name) {
    for (auto kind : {PotentialKind::harmonic, PotentialKind::rosen_morse, PotentialKind::scarf1})
        if (to_string(kind) == name) return kind;
    throw Error(ErrorCode::invalid_params, "unknown potential '" + std::string(name) + "'");
}

namespace {

using RPoly = Poly<Rational>;
using RFn = RationalFn<Rational>;

Rational exact(double v) { return Rational(v); }

// 1 - y^2
RPoly one_minus_y2() { return RPoly{Rational(1), Rational(0), Rational(-1)}; }

void require_params(const ParamMap& params, std::initializer_list<std::string_view> keys, PotentialKind kind) {
    std::set<std::string, std::less<>> wanted;
    for (auto k : keys) wanted.emplace(k);
    for (const auto& [key, value] : params) {
        if (!wanted.contains(key))
            throw Error(ErrorCode::invalid_params,
                        "unknown parameter '" + key + "' for " + std::string(to_string(kind)));
        if (!std::isfinite(value)) throw Error(ErrorCode::invalid_params, "parameter '" + key + "' is not finite");
    }
    for (const auto& key : wanted)
        if (!params.contains(key))
            throw Error(ErrorCode::invalid_params,
                        "missing parameter '" + key + "' for " + std::string(to_string(kind)));
}

// Golden-section refinement of a dense scan; V is smooth on the interior.
double minimize_on(const std::function<double(double)>& f, double lo, double hi) {
    constexpr int samples = 2001;
    double best_x = lo, best = std::numeric_limits<double>::infinity();
    for (int i = 1; i < samples - 1; ++i) {
        const double x = lo + (hi - lo) * i / (samples - 1);
        const double v = f(x);
        if (v < best) best = v, best_x = x;
    }
    const double h = (hi - lo) / (samples - 1);
    double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (f(c) < f(d)) b = d;
        else a = c;
    }
    return std::min(best, f(0.5 * (a + b)));
}

PotentialSpec make_harmonic(const ParamMap& params) {
    require_params(params, {}, PotentialKind::harmonic);
    PotentialSpec s;
    s.kind = PotentialKind::harmonic;
    s.params = params;
    s.potential = [](double x) { return x * x; };
    s.superpotential = [](double x) { return x; };
    s.change.y_of_x = [](Complex x) { return x; };
    s.change.dy_dx = [](Complex) { return Complex(1.0); };
    s.change.x_of_y = [](double y) { return y; };
    s.change.f_of_y = [](double) { return 1.0; };
    s.change.f_squared = RFn::constant(Rational(1));
    s.change.f_log_derivative = RFn{};
    s.potential_in_y = RFn(RPoly{Rational(0), Rational(0), Rational(1)});
    s.residue_rule = ResidueRule::normalizability;
    s.min_potential = 0.0;
    return s;
}

PotentialSpec make_rosen_morse(const ParamMap& params) {
    require_params(params, {"A", "alpha"}, PotentialKind::rosen_morse);
    const double A = params.at("A"), alpha = params.at("alpha");
    if (!(A > 0)) throw Error(ErrorCode::invalid_params, "rosen_morse requires A > 0");
    if (!(alpha > 0)) throw Error(ErrorCode::invalid_params, "rosen_morse requires alpha > 0");

    PotentialSpec s;
    s.kind = PotentialKind::rosen_morse;
    s.params = params;
    s.potential = [A, alpha](double x) {
        const double sech = 1.0 / std::cosh(alpha * x);
        return A * A - A * (A + alpha) * sech * sech;
    };
    s.superpotential = [A, alpha](double x) { return A * std::tanh(alpha * x); };

    auto& c = s.change;
    c.y_of_x = [alpha](Complex x) { return std::tanh(alpha * x); };
    c.dy_dx = [alpha](Complex x) {
        const Complex ch = std::cosh(alpha * x);
        return alpha / (ch * ch);
    };
    c.x_of_y = [alpha](double y) { return std::atanh(y) / alpha; };
    c.f_of_y = [alpha](double y) { return alpha * (1.0 - y * y); };
    const Rational ra = exact(alpha), rA = exact(A);
    c.f_squared = RFn(ra * ra * one_minus_y2() * one_minus_y2());
    c.f_log_derivative = RFn(RPoly{Rational(0), Rational(-2)}, one_minus_y2());
    c.fixed_poles = {FixedPole{1.0, 1.0, {}}, FixedPole{-1.0, 1.0, {}}};
    c.y_domain = Interval{-1.0, 1.0};

    // V = A^2 - A(A + alpha)(1 - y^2); W/F = A y / (alpha (1 - y^2))
    s.potential_in_y = RFn(RPoly::constant(rA * rA) - rA * (rA + ra) * one_minus_y2());
    s.superpotential_over_f = RFn(RPoly{Rational(0), rA}, ra * one_minus_y2());
    s.residue_rule = ResidueRule::susy_limit;
    s.continuum_threshold = A * A;
    s.min_potential = -A * alpha;
    s.complex_singularity_height = std::numbers::pi / (2.0 * alpha);
    return s;
}

PotentialSpec make_scarf1(const ParamMap& params) {
    require_params(params, {"A", "B", "alpha"}, PotentialKind::scarf1);
    const double A = params.at("A"), B = params.at("B"), alpha = params.at("alpha");
    if (!(alpha > 0)) throw Error(ErrorCode::invalid_params, "scarf1 requires alpha > 0");
    classify_scarf_phase(A, B);

    PotentialSpec s;
    s.kind = PotentialKind::scarf1;
    s.params = params;
    const double K = A * A + B * B - A * alpha;
    const double T = B * (2.0 * A - alpha);
    s.potential = [A, alpha, K, T](double x) {
        const double sec = 1.0 / std::cos(alpha * x);
        return -A * A + K * sec * sec - T * std::tan(alpha * x) * sec;
    };
    s.superpotential = [A, B, alpha](double x) { return A * std::tan(alpha * x) - B / std::cos(alpha * x); };
    s.x_domain = Interval{-std::numbers::pi / (2.0 * alpha), std::numbers::pi / (2.0 * alpha)};

    auto& c = s.change;
    c.y_of_x = [alpha](Complex x) { return std::sin(alpha * x); };
    c.dy_dx = [alpha](Complex x) { return alpha * std::cos(alpha * x); };
    c.x_of_y = [alpha](double y) { return std::asin(y) / alpha; };
    c.f_of_y = [alpha](double y) { return alpha * std::sqrt(1.0 - y * y); };
    const Rational ra = exact(alpha), rA = exact(A), rB = exact(B);
    c.f_squared = RFn(ra * ra * one_minus_y2());
    c.f_log_derivative = RFn(RPoly{Rational(0), Rational(-1)}, one_minus_y2());

    // Residue branches at hbar: y = +1 -> {u/2 + hbar/4, -u/2 + 3hbar/4}, u = (A - B)/alpha;
    // y = -1 -> same with v = (A + B)/alpha.
    const double u = (A - B) / alpha, v = (A + B) / alpha;
    c.fixed_poles = {
        FixedPole{1.0, 0.5, {ResidueBranch{u / 2.0, 0.25}, ResidueBranch{-u / 2.0, 0.75}}},
        FixedPole{-1.0, 0.5, {ResidueBranch{v / 2.0, 0.25}, ResidueBranch{-v / 2.0, 0.75}}},
    };
    c.y_domain = Interval{-1.0, 1.0};

    // V = -A^2 + K/(1 - y^2) - T y/(1 - y^2)
    const Rational rK = rA * rA + rB * rB - rA * ra;
    const Rational rT = rB * (Rational(2) * rA - ra);
    s.potential_in_y = RFn::constant(-rA * rA) + RFn(RPoly{rK, -rT}, one_minus_y2());
    s.residue_rule = ResidueRule::hbar_limit;
    s.min_potential = minimize_on(s.potential, s.x_domain.lower, s.x_domain.upper);
    return s;
}

}  // namespace

SusyPhase classify_scarf_phase(double A, double B) {
    const double d = A - B, s = A + B;
    if (d == 0.0 || s == 0.0)
        throw Error(ErrorCode::phase_boundary, "scarf1 requires A - B != 0 and A + B != 0");
    if (d > 0 && s > 0) return SusyPhase::exact;
    if (d > 0 && s < 0) return SusyPhase::broken;
    if (d < 0 && s > 0) return SusyPhase::broken_mirror;
    return SusyPhase::exact_swapped;
}

PotentialSpec instantiate(PotentialKind kind, const ParamMap& params) {
    switch (kind) {
        case PotentialKind::harmonic: return make_harmonic(params);
        case PotentialKind::rosen_morse: return make_rosen_morse(params);
        case PotentialKind::scarf1: return make_scarf1(params);
    }
    throw Error(ErrorCode::invalid_params, "unknown potential kind");
}

PotentialSpec instantiate(std::string_view name, const ParamMap& params) {
    return instantiate(potential_kind_from_name(name), params);
}

SusyPhase classify_susy(const PotentialSpec& spec) {
    switch (spec.kind) {
        case PotentialKind::harmonic: return SusyPhase::not_applicable;
        case PotentialKind::rosen_morse: return SusyPhase::exact;
        case PotentialKind::scarf1: return classify_scarf_phase(spec.param("A"), spec.param("B"));
    }
    return SusyPhase::not_applicable;
}

std::optional<int> bound_state_count(const PotentialSpec& spec) {
    switch (spec.kind) {
        case PotentialKind::harmonic: return std::nullopt;
        case PotentialKind::rosen_morse: {
            // Prefactor exponent (A - n alpha)/(2 alpha) must stay positive.
            const double A = spec.param("A"), alpha = spec.param("alpha");
            int count = static_cast<int>(std::ceil(A / alpha));
            while (count > 0 && !(A - (count - 1) * alpha > 0)) --count;
            while (A - count * alpha > 0) ++count;
            return count;
        }
        case PotentialKind::scarf1:
            // The hbar-limit branches give exponents |u|/2 or (1 - u)/2 with
            // u of the sign that makes them positive; they do not depend on n.
            return std::nullopt;
    }
    return std::nullopt;
}

double closed_form_energy(const PotentialSpec& spec, int n) {
    const auto count = bound_state_count(spec);
    if (n < 0 || (count && n >= *count)) {
        std::ostringstream msg;
        msg << to_string(spec.kind) << " has no bound level n=" << n;
        if (count) msg << " (supports " << *count << ")";
        throw Error(ErrorCode::no_such_level, msg.str());
    }
    switch (spec.kind) {
        case PotentialKind::harmonic: return 2.0 * n + 1.0;
        case PotentialKind::rosen_morse: {
            const double A = spec.param("A"), alpha = spec.param("alpha");
            const double s = A - n * alpha;
            return A * A - s * s;
        }
        case PotentialKind::scarf1: {
            const double A = spec.param("A"), B = spec.param("B"), alpha = spec.param("alpha");
            double e = 0.0;
            switch (classify_scarf_phase(A, B)) {
                case SusyPhase::exact: e = (A + n * alpha) * (A + n * alpha); break;
                case SusyPhase::broken: e = (B - (n + 0.5) * alpha) * (B - (n + 0.5) * alpha); break;
                case SusyPhase::broken_mirror: e = (B + (n + 0.5) * alpha) * (B + (n + 0.5) * alpha); break;
                case SusyPhase::exact_swapped: e = ((n + 1.0) * alpha - A) * ((n + 1.0) * alpha - A); break;
                case SusyPhase::not_applicable: break;
            }
            return e - A * A;
        }
    }
    return 0.0;
}

std::string list_potentials() {
    std::ostringstream out;
    out << "harmonic (scaled units): no parameters; V(xi) = xi^2, energies reported as lambda\n"
        << "rosen_morse: A>0, alpha>0; V(x) = A^2 - A(A+alpha) sech^2(alpha x)\n"
        << "scarf1: alpha>0, A-B!=0, A+B!=0; V(x) = -A^2 + (A^2+B^2-A alpha) sec^2(alpha x)"
           " - B(2A-alpha) tan(alpha x) sec(alpha x) on |x| < pi/(2 alpha)\n"
        << "  scarf1 SUSY phases:\n"
        << "    A-B>0, A+B>0 : exact\n"
        << "    A-B>0, A+B<0 : broken\n"
        << "    A-B<0, A+B<0 : exact_swapped (roles of H- and H+ interchanged)\n"
        << "    A-B<0, A+B>0 : broken_mirror\n";
    return out.str();
}

}  // namespace qhj
