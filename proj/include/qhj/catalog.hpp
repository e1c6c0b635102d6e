#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qhj/polyrat.hpp"
#include "qhj/scalar.hpp"

namespace qhj {

/// All computations use hbar = 1 and 2m = 1.  The oscillator is carried in
/// the scaled variables (xi, lambda) of -psi'' + xi^2 psi = lambda psi.
struct UnitConvention {
    static constexpr double hbar = 1.0;
    static constexpr double two_m = 1.0;
};

enum class PotentialKind { harmonic, rosen_morse, scarf1 };

enum class SusyPhase { exact, broken, exact_swapped, broken_mirror, not_applicable };

enum class ResidueRule { susy_limit, hbar_limit, normalizability };

std::string_view to_string(PotentialKind kind);
std::string_view to_string(SusyPhase phase);
std::string_view to_string(ResidueRule rule);

using ParamMap = std::map<std::string, double>;

/// Open interval; infinite ends allowed.
struct Interval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool finite() const { return std::isfinite(lower) && std::isfinite(upper); }
    bool contains(double x) const { return x > lower && x < upper; }
};

/// One analytic branch c + d*hbar of the residue at a fixed pole.
struct ResidueBranch {
    double classical = 0.0;
    double quantum = 0.0;

    double at_unit_hbar() const { return classical + quantum; }
};

struct FixedPole {
    double location = 0.0;
    /// F(y) ~ (y - location)^f_zero_order near the pole.
    double f_zero_order = 0.0;
    /// hbar-linear residue branches, where the entry supplies them.
    std::vector<ResidueBranch> branches;
};

/// y = f(x) with F(y) = f'(x(y)).  F itself may be algebraic in y; its square
/// and logarithmic derivative are rational and exact.
struct ChangeOfVariable {
    std::function<Complex(Complex)> y_of_x;
    std::function<Complex(Complex)> dy_dx;
    std::function<double(double)> x_of_y;
    std::function<double(double)> f_of_y;
    RationalFn<Rational> f_squared;
    RationalFn<Rational> f_log_derivative;
    std::vector<FixedPole> fixed_poles;
    Interval y_domain;
};

struct PotentialSpec {
    PotentialKind kind = PotentialKind::harmonic;
    ParamMap params;
    Interval x_domain;
    std::function<double(double)> potential;
    std::optional<std::function<double(double)>> superpotential;
    ChangeOfVariable change;
    /// V(x(y)), exact.
    RationalFn<Rational> potential_in_y;
    /// W(y)/F(y) where rational; drives the susy_limit residue rule.
    std::optional<RationalFn<Rational>> superpotential_over_f;
    ResidueRule residue_rule = ResidueRule::normalizability;
    double continuum_threshold = std::numeric_limits<double>::infinity();
    double min_potential = 0.0;
    /// Distance from the real axis to the nearest complex singularity of psi
    /// (infinite when there is none).
    double complex_singularity_height = std::numeric_limits<double>::infinity();

    std::string_view name() const { return to_string(kind); }
    double param(const std::string& key) const { return params.at(key); }
};

/// Parses a catalog name ("harmonic", "rosen_morse", "scarf1").
PotentialKind potential_kind_from_name(std::string_view name);

/// Builds a validated spec.  Throws InvalidParams (missing/unknown/out of
/// range parameter) or PhaseBoundary (scarf1 with A - B = 0 or A + B = 0).
PotentialSpec instantiate(PotentialKind kind, const ParamMap& params);
PotentialSpec instantiate(std::string_view name, const ParamMap& params);

/// Scarf-I phase table from the signs of A - B and A + B.
SusyPhase classify_scarf_phase(double A, double B);
SusyPhase classify_susy(const PotentialSpec& spec);

/// Number of bound states; nullopt means unbounded.
std::optional<int> bound_state_count(const PotentialSpec& spec);

/// Closed-form E_n (lambda_n for the oscillator).  Throws NoSuchLevel.
double closed_form_energy(const PotentialSpec& spec, int n);

/// Human-readable catalog listing with parameter constraints and phase table.
std::string list_potentials();

}  // namespace qhj
