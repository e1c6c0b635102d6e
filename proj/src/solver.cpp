#include "qhj/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace qhj {

RationalFn<Rational> chi_coefficient_exact(const PotentialSpec& spec, const Rational& energy) {
    const auto& c = spec.change;
    const RationalFn<Rational> e_minus_v = RationalFn<Rational>::constant(energy) - spec.potential_in_y;
    const RationalFn<Rational>& L = c.f_log_derivative;
    return e_minus_v / c.f_squared - Rational(1, 2) * L.derivative() - Rational(1, 4) * (L * L);
}

namespace {

using RPoly = Poly<Rational>;

template <typename Scalar>
Poly<Scalar> pole_product(const std::vector<Scalar>& poles) {
    Poly<Scalar> p = Poly<Scalar>::constant(Scalar(1));
    for (const auto& y : poles) p = p * Poly<Scalar>::linear_factor(y);
    return p;
}

std::vector<Rational> catalog_poles(const PotentialSpec& spec) {
    std::vector<Rational> out;
    for (const auto& fp : spec.change.fixed_poles) out.emplace_back(fp.location);
    return out;
}

// numerator of R over pi^2, i.e. R = N / pi^2
template <typename Scalar>
Poly<Scalar> numerator_over(const Poly<Scalar>& num, const Poly<Scalar>& den, const Poly<Scalar>& pi) {
    const auto dm = divmod(pi * pi, den);
    if (!dm.remainder.is_zero()) {
        if constexpr (is_exact_v<Scalar>) {
            throw Error(ErrorCode::inconsistent_reduction, "R has poles outside the declared fixed poles");
        } else {
            if (dm.remainder.max_magnitude() > 1e-9 * std::max(1.0, (pi * pi).max_magnitude()))
                throw Error(ErrorCode::inconsistent_reduction, "R has poles outside the declared fixed poles");
        }
    }
    return num * dm.quotient;
}

// Coefficients of y^top, y^(top-1), ... of num/den at infinity (no reduction).
template <typename Scalar>
std::vector<Scalar> series_at_infinity(const Poly<Scalar>& num, const Poly<Scalar>& den, int top, int count) {
    std::vector<Scalar> out(std::max(count, 0), Scalar(0));
    const int dn = num.degree(), dd = den.degree();
    // y^(dn-dd) leads; coefficient of y^(dn-dd-j) is c_j
    std::vector<Scalar> c;
    const int needed = (dn - dd) - (top - count + 1) + 1;
    for (int j = 0; j < needed; ++j) {
        Scalar acc = num[dn - j];
        for (int i = 1; i <= std::min(j, dd); ++i) acc -= den[dd - i] * c[j - i];
        c.push_back(acc / den[dd]);
    }
    for (int k = 0; k < count; ++k) {
        const int j = (dn - dd) - (top - k);
        if (j >= 0 && j < static_cast<int>(c.size())) out[k] = c[j];
    }
    return out;
}

template <typename Scalar>
Scalar series_coefficient(const Poly<Scalar>& num, const Poly<Scalar>& den, int power) {
    if (num.is_zero()) return Scalar(0);
    return series_at_infinity(num, den, power, 1)[0];
}

bool exact_sqrt(const Rational& v, Rational& out) {
    using boost::multiprecision::cpp_int;
    if (v < 0) return false;
    const cpp_int num = boost::multiprecision::numerator(v);
    const cpp_int den = boost::multiprecision::denominator(v);
    const cpp_int rn = boost::multiprecision::sqrt(num);
    const cpp_int rd = boost::multiprecision::sqrt(den);
    if (rn * rn != num || rd * rd != den) return false;
    out = Rational(rn) / Rational(rd);
    return true;
}

template <typename Scalar>
Scalar scalar_sqrt(const Scalar& v) {
    if constexpr (is_exact_v<Scalar>) {
        Rational r;
        if (!exact_sqrt(v, r))
            throw Error(ErrorCode::inconsistent_reduction, "analytic part is irrational in exact arithmetic");
        return r;
    } else {
        return std::sqrt(v);
    }
}

template <typename Scalar>
struct CoreReduction {
    Poly<Scalar> sigma;
    Poly<Scalar> tau;
    Scalar lambda0{};
    double consistency = 0.0;
};

// sigma = c pi with c = prod(-1/y_i); G = h pi + sum b_i pi/(y - y_i);
// tau = 2 c G; c (G^2 + G' pi - G pi' + N)/pi must be the constant lambda0.
template <typename Scalar>
CoreReduction<Scalar> reduce_core(const Poly<Scalar>& N, const std::vector<Scalar>& poles,
                                  const std::vector<Scalar>& residues, const Poly<Scalar>& h) {
    const Poly<Scalar> pi = pole_product(poles);
    Scalar c = Scalar(1);
    for (const auto& y : poles) c = c * (Scalar(-1) / y);

    Poly<Scalar> G = h * pi;
    for (std::size_t i = 0; i < poles.size(); ++i) G += residues[i] * deflate(pi, poles[i]);

    const Poly<Scalar> S = G * G + G.derivative() * pi - G * pi.derivative() + N;
    const auto dm = divmod(S, pi);

    CoreReduction<Scalar> out;
    out.sigma = c * pi;
    out.tau = Scalar(2) * c * G;
    const Poly<Scalar> Q = c * dm.quotient;
    out.lambda0 = Q[0];

    const double scale = std::max({1.0, S.max_magnitude(), N.max_magnitude()});
    double leftover = dm.remainder.max_magnitude();
    for (int k = 1; k <= Q.degree(); ++k) leftover = std::max(leftover, magnitude(Q[k]));
    out.consistency = leftover / scale;
    return out;
}

template <typename Scalar>
void check_core(const CoreReduction<Scalar>& core) {
    bool bad;
    if constexpr (is_exact_v<Scalar>) bad = core.consistency != 0.0;
    else bad = core.consistency > 1e-9;
    if (bad) {
        std::ostringstream msg;
        msg << "non-constant terms survive the substitution (relative " << core.consistency << ")";
        throw Error(ErrorCode::inconsistent_reduction, msg.str());
    }
    int tau_degree = core.tau.degree();
    if constexpr (!is_exact_v<Scalar>) tau_degree = core.tau.trimmed(1e-12).degree();
    if (tau_degree > 1) throw Error(ErrorCode::inconsistent_reduction, "tau has degree above one");
}

struct Choice {
    std::vector<double> values;
    ResidueRule rule = ResidueRule::normalizability;
    bool unique = true;
};

const ResiduePair& pair_for(const std::vector<ResiduePair>& pairs, double pole) {
    for (const auto& p : pairs)
        if (std::abs(p.pole - pole) < 1e-12) return p;
    std::ostringstream msg;
    msg << "no residue pair supplied for the fixed pole at y=" << pole;
    throw Error(ErrorCode::no_physical_selection, msg.str());
}

bool all_positive_exponents(const PotentialSpec& spec, const std::vector<double>& values) {
    const auto& poles = spec.change.fixed_poles;
    for (std::size_t i = 0; i < poles.size(); ++i)
        if (!(values[i] - 0.5 * poles[i].f_zero_order > 0.0)) return false;
    return true;
}

ResiduePair make_pair(double pole, double r2) {
    const double disc = 1.0 - 4.0 * r2;
    if (disc < -1e-14 * (1.0 + 4.0 * std::abs(r2))) {
        std::ostringstream msg;
        msg << "1 - 4 r2 = " << disc << " < 0 at y=" << pole;
        throw Error(ErrorCode::complex_residues, msg.str());
    }
    const double s = std::sqrt(std::max(disc, 0.0));
    return {pole, 0.5 * (1.0 + s), 0.5 * (1.0 - s)};
}

// +1 / -1 per pole: which root reproduces -W/F + F'/(2F) at E = 0.
std::vector<int> susy_branch_signs(const PotentialSpec& spec) {
    std::vector<int> signs;
    if (!spec.superpotential_over_f) throw Error(ErrorCode::no_physical_selection, "susy_limit needs W/F");
    const RationalFn<Rational> R0 = chi_coefficient_exact(spec, Rational(0));
    for (const auto& fp : spec.change.fixed_poles) {
        const Rational pole(fp.location);
        const double r2 = static_cast<double>(laurent_at(R0, pole).coefficient(2));
        const double w = static_cast<double>(laurent_at(*spec.superpotential_over_f, pole).coefficient(1));
        const double b0 = -w + 0.5 * fp.f_zero_order;
        const ResiduePair p = make_pair(fp.location, r2);
        signs.push_back(std::abs(b0 - p.root_plus) <= std::abs(b0 - p.root_minus) ? 1 : -1);
    }
    return signs;
}

Choice choose_residues(const PotentialSpec& spec, const std::vector<ResiduePair>& pairs,
                       const std::vector<int>* signs) {
    const auto& poles = spec.change.fixed_poles;
    Choice out;
    out.rule = spec.residue_rule;
    if (poles.empty()) return out;

    std::vector<const ResiduePair*> ordered;
    for (const auto& fp : poles) ordered.push_back(&pair_for(pairs, fp.location));

    // all sign combinations with positive exponents
    const std::size_t combos = std::size_t{1} << poles.size();
    std::vector<std::vector<double>> normalizable;
    for (std::size_t mask = 0; mask < combos; ++mask) {
        std::vector<double> v;
        for (std::size_t i = 0; i < poles.size(); ++i)
            v.push_back((mask >> i) & 1U ? ordered[i]->root_minus : ordered[i]->root_plus);
        if (all_positive_exponents(spec, v)) normalizable.push_back(std::move(v));
    }
    // a double root counts once
    std::sort(normalizable.begin(), normalizable.end());
    normalizable.erase(std::unique(normalizable.begin(), normalizable.end()), normalizable.end());
    out.unique = normalizable.size() == 1;

    std::vector<double> primary;
    if (spec.residue_rule == ResidueRule::susy_limit) {
        std::vector<int> local;
        if (!signs) local = susy_branch_signs(spec);
        const std::vector<int>& s = signs ? *signs : local;
        for (std::size_t i = 0; i < poles.size(); ++i)
            primary.push_back(s[i] > 0 ? ordered[i]->root_plus : ordered[i]->root_minus);
    } else if (spec.residue_rule == ResidueRule::hbar_limit) {
        for (std::size_t i = 0; i < poles.size(); ++i) {
            const ResidueBranch* pick = nullptr;
            int positive = 0;
            for (const auto& br : poles[i].branches)
                if (br.classical > 0) pick = &br, ++positive;
            if (positive != 1) {
                primary.clear();
                break;
            }
            const double v = pick->at_unit_hbar();
            const double tol = 1e-9 * (1.0 + std::abs(v));
            if (std::abs(v - ordered[i]->root_plus) <= tol) primary.push_back(ordered[i]->root_plus);
            else if (std::abs(v - ordered[i]->root_minus) <= tol) primary.push_back(ordered[i]->root_minus);
            else throw Error(ErrorCode::no_physical_selection, "hbar-limit branch matches neither computed root");
        }
    }

    if (!primary.empty() && all_positive_exponents(spec, primary)) {
        out.values = primary;
        return out;
    }
    if (normalizable.size() == 1) {
        out.values = normalizable.front();
        out.rule = ResidueRule::normalizability;
        return out;
    }
    throw Error(ErrorCode::no_physical_selection,
                normalizable.empty() ? "no residue combination gives positive exponents"
                                     : "several residue combinations are normalizable and no rule decides");
}

}  // namespace

template <typename Scalar>
ChiEquation<Scalar> build_chi_equation(const PotentialSpec& spec, const Scalar& energy) {
    const RationalFn<Rational> exact_R = chi_coefficient_exact(spec, scalar_cast<Rational>(energy));
    const RPoly pi = pole_product(catalog_poles(spec));
    if (!divmod(pi * pi, exact_R.denominator()).remainder.is_zero())
        throw Error(ErrorCode::inconsistent_reduction, "R has poles outside the declared fixed poles");

    ChiEquation<Scalar> eq;
    eq.coefficient = exact_R.template cast<Scalar>();
    eq.energy = energy;
    eq.transform = {spec.change.f_squared, spec.change.f_log_derivative};
    for (const auto& fp : spec.change.fixed_poles) {
        LaurentData<Scalar> d;
        try {
            d = laurent_at(eq.coefficient, scalar_cast<Scalar>(fp.location));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::not_a_pole) throw;
            d.pole = scalar_cast<Scalar>(fp.location);  // cancelled at this energy
        }
        if (d.max_order > 2) throw Error(ErrorCode::inconsistent_reduction, "fixed pole of R above second order");
        eq.fixed_pole_data.push_back(std::move(d));
    }
    return eq;
}

template <typename Scalar>
ResiduePair fixed_pole_residues(const ChiEquation<Scalar>& eq, double pole) {
    const Scalar p = scalar_cast<Scalar>(pole);
    for (const auto& d : eq.fixed_pole_data)
        if (magnitude(Scalar(d.pole - p)) < 1e-12) return make_pair(pole, scalar_cast<double>(d.coefficient(2)));
    const LaurentData<Scalar> d = laurent_at(eq.coefficient, p);
    return make_pair(pole, scalar_cast<double>(d.coefficient(2)));
}

double ResidueSet::residue_at(double pole) const {
    for (const auto& [y, b] : chosen)
        if (std::abs(y - pole) < 1e-12) return b;
    throw Error(ErrorCode::not_a_pole, "no residue recorded at this pole");
}

ResidueSet select_residues(const PotentialSpec& spec, const std::vector<ResiduePair>& pairs, double energy) {
    const Choice c = choose_residues(spec, pairs, nullptr);
    ResidueSet out;
    out.selection_rule = c.rule;
    out.unique_normalizable = c.unique;
    for (std::size_t i = 0; i < spec.change.fixed_poles.size(); ++i)
        out.chosen.emplace_back(spec.change.fixed_poles[i].location, c.values[i]);

    const RationalFn<Rational> R = chi_coefficient_exact(spec, Rational(energy));
    const Poly<double> h = analytic_part(R.numerator().cast<double>(), R.denominator().cast<double>());
    out.constant_C = h[0];
    return out;
}

ResidueSet physical_residues(const PotentialSpec& spec, double energy) {
    const ChiEquation<double> eq = build_chi_equation(spec, energy);
    std::vector<ResiduePair> pairs;
    for (const auto& fp : spec.change.fixed_poles) pairs.push_back(fixed_pole_residues(eq, fp.location));
    return select_residues(spec, pairs, energy);
}

template <typename Scalar>
Poly<Scalar> analytic_part(const Poly<Scalar>& r_num, const Poly<Scalar>& r_den) {
    if (r_num.is_zero()) return {};
    const int d = r_num.degree() - r_den.degree();
    if (d <= 0) {
        const Scalar r0 = d == 0 ? Scalar(r_num.leading() / r_den.leading()) : Scalar(0);
        const double scale = std::max(r_num.max_magnitude() / magnitude(r_den.leading()), 1.0);
        if (negligible(r0, scale, 1e-13)) return {};
        if (r0 > 0)
            throw Error(ErrorCode::inconsistent_reduction, "R tends to a positive constant: no decaying analytic part");
        return Poly<Scalar>::constant(Scalar(-scalar_sqrt(Scalar(-r0))));
    }
    if (d % 2 != 0) throw Error(ErrorCode::inconsistent_reduction, "R grows like an odd power of y");
    const int m = d / 2;
    const std::vector<Scalar> r = series_at_infinity(r_num, r_den, d, m + 1);  // y^d .. y^m
    if (!(r[0] < 0)) throw Error(ErrorCode::inconsistent_reduction, "R grows to +infinity: no decaying solution");

    std::vector<Scalar> h(m + 1, Scalar(0));
    h[m] = -scalar_sqrt(Scalar(-r[0]));
    for (int j = m - 1; j >= 0; --j) {
        Scalar acc = r[m - j];  // coefficient of y^(m+j)
        for (int i = j + 1; i <= m - 1; ++i) {
            const int k = m + j - i;
            if (k > j && k < m) acc += h[i] * h[k];
        }
        h[j] = -acc / (Scalar(2) * h[m]);
    }
    typename Poly<Scalar>::Coeffs c(m + 1);
    for (int k = 0; k <= m; ++k) c(k) = h[k];
    return Poly<Scalar>(std::move(c));
}

template <typename Scalar>
PolynomialOde ReducedEquation<Scalar>::ode() const {
    return {sigma.template cast<double>(), tau.template cast<double>(), scalar_cast<double>(lambda0)};
}

template <typename Scalar>
ReducedEquation<Scalar> reduce_to_polynomial_ode(const ChiEquation<Scalar>& eq, const std::vector<Scalar>& residues,
                                                 int n) {
    if (residues.size() != eq.fixed_pole_data.size())
        throw Error(ErrorCode::inconsistent_reduction, "one residue per fixed pole is required");
    std::vector<Scalar> poles;
    for (const auto& d : eq.fixed_pole_data) poles.push_back(d.pole);

    const Poly<Scalar>& num = eq.coefficient.numerator();
    const Poly<Scalar>& den = eq.coefficient.denominator();
    const Poly<Scalar> N = numerator_over(num, den, pole_product(poles));
    const Poly<Scalar> h = analytic_part(num, den);

    const CoreReduction<Scalar> core = reduce_core(N, poles, residues, h);
    check_core(core);

    ReducedEquation<Scalar> out;
    out.sigma = core.sigma;
    out.tau = core.tau;
    out.lambda0 = core.lambda0;
    out.analytic_part = h;
    out.constant_C = h[0];
    out.consistency_residual = core.consistency;

    const int m = h.is_zero() ? 0 : h.degree();
    if (m >= 1) {
        Scalar acc = series_coefficient(num, den, m);
        for (int i = 0; i <= m; ++i) acc += h[i] * h[m - i];
        out.large_y_residual = acc;
    } else {
        Scalar k = Scalar(n);
        for (const auto& b : residues) k += b;
        out.large_y_residual = Scalar(2) * out.constant_C * k + series_coefficient(num, den, -1);
    }
    return out;
}

ReducedEquation<double> reduce_to_polynomial_ode(const ChiEquation<double>& eq, const ResidueSet& residues, int n) {
    std::vector<double> b;
    for (const auto& d : eq.fixed_pole_data) b.push_back(residues.residue_at(d.pole));
    return reduce_to_polynomial_ode(eq, b, n);
}

template ChiEquation<double> build_chi_equation(const PotentialSpec&, const double&);
template ChiEquation<Rational> build_chi_equation(const PotentialSpec&, const Rational&);
template ResiduePair fixed_pole_residues(const ChiEquation<double>&, double);
template ResiduePair fixed_pole_residues(const ChiEquation<Rational>&, double);
template Poly<double> analytic_part(const Poly<double>&, const Poly<double>&);
template Poly<Rational> analytic_part(const Poly<Rational>&, const Poly<Rational>&);
template struct ReducedEquation<double>;
template struct ReducedEquation<Rational>;
template ReducedEquation<double> reduce_to_polynomial_ode(const ChiEquation<double>&, const std::vector<double>&, int);
template ReducedEquation<Rational> reduce_to_polynomial_ode(const ChiEquation<Rational>&, const std::vector<Rational>&,
                                                            int);

// ---------------------------------------------------------------------------

TerminationFunction::TerminationFunction(const PotentialSpec& spec, int n) : spec_(&spec), n_(n) {
    const RationalFn<Rational> R0 = chi_coefficient_exact(spec, Rational(0));
    const RationalFn<Rational> R1 = chi_coefficient_exact(spec, Rational(1));
    const RPoly pi = pole_product(catalog_poles(spec));
    const RPoly N0 = numerator_over(R0.numerator(), R0.denominator(), pi);
    const RPoly N1 = numerator_over(R1.numerator(), R1.denominator(), pi);
    base_numerator_ = N0.cast<double>();
    energy_numerator_ = (N1 - N0).cast<double>();
    pole_product_ = pi.cast<double>();
    for (const auto& fp : spec.change.fixed_poles) {
        const Rational p(fp.location);
        const auto r2 = [&](const RationalFn<Rational>& R) {
            try {
                return laurent_at(R, p).coefficient(2);
            } catch (const Error&) {
                return Rational(0);
            }
        };
        const Rational a = r2(R0), b = r2(R1);
        r2_base_.push_back(static_cast<double>(a));
        r2_energy_.push_back(static_cast<double>(b - a));
    }
    if (spec.residue_rule == ResidueRule::susy_limit) branch_signs_ = susy_branch_signs(spec);
}

std::optional<double> TerminationFunction::operator()(double energy) const {
    const auto& poles = spec_->change.fixed_poles;
    std::vector<ResiduePair> pairs;
    std::vector<double> ys;
    try {
        for (std::size_t i = 0; i < poles.size(); ++i) {
            pairs.push_back(make_pair(poles[i].location, r2_base_[i] + energy * r2_energy_[i]));
            ys.push_back(poles[i].location);
        }
        const Choice c = choose_residues(*spec_, pairs, branch_signs_.empty() ? nullptr : &branch_signs_);
        const Poly<double> N = base_numerator_ + energy * energy_numerator_;
        const Poly<double> h = analytic_part(N, pole_product_ * pole_product_);
        const CoreReduction<double> core = reduce_core(N, ys, c.values, h);
        return core.lambda0 + n_ * core.tau[1] + n_ * (n_ - 1.0) * core.sigma[2];
    } catch (const Error&) {
        return std::nullopt;
    }
}

namespace {

struct Bracket {
    double lo, hi;
    double g_lo, g_hi;
};

std::optional<Bracket> scan(const TerminationFunction& g, double lo, double hi, int per_unit, double& g_first,
                            double& g_last) {
    const long steps = std::max(2L, static_cast<long>(std::ceil((hi - lo) * per_unit)));
    std::optional<double> prev;
    double prev_e = lo;
    for (long k = 0; k <= steps; ++k) {
        const double e = lo + (hi - lo) * static_cast<double>(k) / steps;
        const auto v = g(e);
        if (v) {
            if (std::isnan(g_first)) g_first = *v;
            g_last = *v;
        }
        if (v && *v == 0.0) return Bracket{e, e, 0.0, 0.0};
        if (v && prev && ((*v < 0) != (*prev < 0))) return Bracket{prev_e, e, *prev, *v};
        prev = v;
        prev_e = e;
    }
    return std::nullopt;
}

double bisect(const TerminationFunction& g, Bracket b) {
    for (int it = 0; it < 200 && b.hi - b.lo > 1e-13 * std::max(1.0, std::abs(b.lo)); ++it) {
        const double mid = 0.5 * (b.lo + b.hi);
        if (mid <= b.lo || mid >= b.hi) break;
        const auto v = g(mid);
        if (!v) throw Error(ErrorCode::root_not_found, "termination function undefined inside its bracket");
        if (*v == 0.0) return mid;
        if ((*v < 0) == (b.g_lo < 0)) b.lo = mid, b.g_lo = *v;
        else b.hi = mid, b.g_hi = *v;
    }
    return 0.5 * (b.lo + b.hi);
}

}  // namespace

SpectralLine solve_level(const PotentialSpec& spec, int n) {
    const double closed = closed_form_energy(spec, n);  // NoSuchLevel outside the ladder

    const TerminationFunction g(spec, n);
    const double lo = spec.min_potential;
    const bool bounded = std::isfinite(spec.continuum_threshold);
    constexpr double max_span = 1000.0;

    std::optional<Bracket> bracket;
    double g_first = std::numeric_limits<double>::quiet_NaN(), g_last = g_first;
    double upper = lo;
    for (int attempt = 0, per_unit = 400; attempt <= 3 && !bracket; ++attempt, per_unit *= 2) {
        if (bounded) {
            upper = spec.continuum_threshold;
            bracket = scan(g, lo, upper, per_unit, g_first, g_last);
        } else {
            double a = lo, width = 10.0;
            while (!bracket && a - lo < max_span) {
                bracket = scan(g, a, a + width, per_unit, g_first, g_last);
                a += width;
                width *= 2.0;
            }
            upper = a;
        }
    }
    if (!bracket) {
        std::ostringstream msg;
        msg << "no sign change of g_" << n << " on [" << lo << ", " << upper << "]; g = " << g_first << " ... "
            << g_last;
        throw Error(ErrorCode::root_not_found, msg.str());
    }
    const double energy = bracket->lo == bracket->hi ? bracket->lo : bisect(g, *bracket);

    // Re-derive everything at the root from the exact chi equation.
    const ChiEquation<double> eq = build_chi_equation(spec, energy);
    std::vector<ResiduePair> pairs;
    for (const auto& fp : spec.change.fixed_poles) pairs.push_back(fixed_pole_residues(eq, fp.location));
    const ResidueSet residues = select_residues(spec, pairs, energy);
    const ReducedEquation<double> red = reduce_to_polynomial_ode(eq, residues, n);
    const double scale = std::max(1.0, std::abs(energy));
    if (std::abs(red.constant_C) > 1e-12 * scale || std::abs(red.large_y_residual) > 1e-9 * scale) {
        std::ostringstream msg;
        msg << "analytic constant C=" << red.constant_C << " fails the large-y matching (residual "
            << red.large_y_residual << ")";
        throw Error(ErrorCode::inconsistent_reduction, msg.str());
    }

    SpectralLine line;
    line.n = n;
    line.energy_qhj = energy;
    line.energy_closed_form = closed;
    if (spec.kind == PotentialKind::harmonic) line.lambda_scaled = energy;
    line.constant_C = red.constant_C;
    line.large_y_residual = red.large_y_residual;
    return line;
}

// ---------------------------------------------------------------------------

namespace {

double unnormalized(const ClosedFormWavefunction& wf, double x);

template <typename F>
double integrate_domain(const Interval& dom, F f) {
    const auto guarded = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : 0.0;
    };
    if (dom.finite()) {
        boost::math::quadrature::tanh_sinh<double> q;
        return q.integrate(guarded, dom.lower, dom.upper, 1e-13);
    }
    boost::math::quadrature::sinh_sinh<double> q;
    return q.integrate(guarded, 1e-13);
}

// Real x samples covering where psi lives.
std::vector<double> sample_points(const ClosedFormWavefunction& wf, int count) {
    std::vector<double> xs;
    const Interval& yd = wf.change.y_domain;
    if (yd.finite()) {
        for (int i = 1; i < count - 1; ++i) {
            const double y = yd.lower + (yd.upper - yd.lower) * i / (count - 1.0);
            xs.push_back(wf.change.x_of_y(y));
        }
    } else {
        const double half = 2.0 * std::sqrt(std::max(std::abs(wf.energy), 1.0)) + 8.0;
        for (int i = 1; i < count - 1; ++i) xs.push_back(-half + 2.0 * half * i / (count - 1.0));
    }
    return xs;
}

double unnormalized(const ClosedFormWavefunction& wf, double x) {
    const double y = wf.change.y_of_x(Complex(x)).real();
    double v = 1.0;
    for (const auto& [pole, e] : wf.exponents) {
        const double base = 1.0 - y / pole;
        if (base <= 0.0) return 0.0;
        v *= std::pow(base, e);
    }
    if (wf.gaussian_exponent) v *= std::exp(-*wf.gaussian_exponent * y * y / 2.0);
    if (v == 0.0) return 0.0;
    return v * polynomial_with_derivative(wf, Complex(y)).first.real();
}

}  // namespace

std::pair<Complex, Complex> polynomial_with_derivative(const ClosedFormWavefunction& wf, Complex y) {
    const int n = wf.level;
    switch (wf.family) {
        case PolynomialFamily::hermite: {
            const double s = std::ldexp(1.0, -n);
            return {s * hermite_eval(n, y), s * hermite_derivative(n, y)};
        }
        case PolynomialFamily::jacobi: {
            const double a = wf.indices.a, b = wf.indices.b;
            const double lc = jacobi_leading_coefficient(n, a, b);
            return {jacobi_eval(n, a, b, y) / lc, jacobi_derivative(n, a, b, y) / lc};
        }
        case PolynomialFamily::general: break;
    }
    return {wf.polynomial(y), wf.polynomial.derivative()(y)};
}

ClosedFormWavefunction assemble_wavefunction(const PotentialSpec& spec, const SpectralLine& line,
                                             const ResidueSet& residues) {
    ClosedFormWavefunction wf;
    wf.kind = spec.kind;
    wf.level = line.n;
    wf.energy = line.energy_qhj;
    wf.change = spec.change;
    wf.x_domain = spec.x_domain;

    for (const auto& fp : spec.change.fixed_poles) {
        const double e = residues.residue_at(fp.location) - 0.5 * fp.f_zero_order;
        if (!(e > 0.0)) {
            std::ostringstream msg;
            msg << "prefactor exponent " << e << " at y=" << fp.location << " is not positive";
            throw Error(ErrorCode::not_normalizable, msg.str());
        }
        wf.exponents.emplace_back(fp.location, e);
    }

    const ChiEquation<double> eq = build_chi_equation(spec, line.energy_qhj);
    const ReducedEquation<double> red = reduce_to_polynomial_ode(eq, residues, line.n);
    const Poly<double>& h = red.analytic_part;
    if (h.degree() > 1) throw Error(ErrorCode::inconsistent_reduction, "analytic part beyond linear order");
    if (h.degree() == 1) {
        if (!(h[1] < 0)) throw Error(ErrorCode::not_normalizable, "growing Gaussian factor");
        wf.gaussian_exponent = -h[1];
    }
    if (!spec.x_domain.finite() && !wf.gaussian_exponent && wf.exponents.empty())
        throw Error(ErrorCode::not_normalizable, "no decaying factor on an infinite domain");

    const PolynomialOde ode = red.ode();
    wf.polynomial = frobenius_polynomial(ode, line.n);

    // Classical families: evaluate by recurrence.
    const double tol = 1e-12;
    const double ts = std::max(1.0, ode.tau.max_magnitude());
    const Poly<double> one_minus_y2{1.0, 0.0, -1.0};
    if ((ode.sigma - one_minus_y2).max_magnitude() <= tol) {
        const double a = (-ode.tau[1] - 2.0 - ode.tau[0]) / 2.0;
        const double b = (-ode.tau[1] - 2.0 + ode.tau[0]) / 2.0;
        if (jacobi_recurrence_regular(line.n, a, b) && std::abs(jacobi_leading_coefficient(line.n, a, b)) > 1e-300) {
            wf.family = PolynomialFamily::jacobi;
            wf.indices = {a, b};
        }
    } else if ((ode.sigma - Poly<double>::constant(1.0)).max_magnitude() <= tol &&
               (ode.tau - Poly<double>{0.0, -2.0}).max_magnitude() <= tol * ts) {
        wf.family = PolynomialFamily::hermite;
    }

    // Normalize; sign: positive next to the left end.
    wf.norm = 1.0;
    const double mass = integrate_domain(spec.x_domain, [&](double x) {
        const double v = unnormalized(wf, x);
        return v * v;
    });
    if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(ErrorCode::not_normalizable, "norm integral failed");
    const double lower_y = spec.change.y_domain.lower;
    double sign = (line.n % 2 == 0) ? 1.0 : -1.0;
    if (std::isfinite(lower_y)) {
        const double p = wf.polynomial(lower_y);
        if (p != 0.0) sign = p > 0 ? 1.0 : -1.0;
    }
    wf.norm = sign / std::sqrt(mass);

    double peak = 0.0;
    for (double x : sample_points(wf, 4001)) peak = std::max(peak, std::abs(wavefunction_eval(wf, x)));
    wf.peak = peak;
    return wf;
}

ClosedFormWavefunction solve_wavefunction(const PotentialSpec& spec, int n) {
    const SpectralLine line = solve_level(spec, n);
    return assemble_wavefunction(spec, line, physical_residues(spec, line.energy_qhj));
}

Complex wavefunction_eval(const ClosedFormWavefunction& wf, Complex x) {
    const Complex y = wf.change.y_of_x(x);
    Complex v = wf.norm;
    for (const auto& [pole, e] : wf.exponents) {
        const Complex base = 1.0 - y / pole;
        if (base == Complex(0.0)) return 0.0;
        if (base.real() < 0.0 && std::abs(base.imag()) <= 1e-14 * (1.0 + std::abs(base))) {
            std::ostringstream msg;
            msg << "prefactor (1 - y/" << pole << ") is on its branch cut at x=" << x;
            throw Error(ErrorCode::branch_cut, msg.str());
        }
        v *= std::pow(base, e);
    }
    if (wf.gaussian_exponent) v *= std::exp(-*wf.gaussian_exponent * y * y / 2.0);
    return v * polynomial_with_derivative(wf, y).first;
}

double wavefunction_eval(const ClosedFormWavefunction& wf, double x) {
    if (x < wf.x_domain.lower || x > wf.x_domain.upper) {
        std::ostringstream msg;
        msg << "x=" << x << " is outside the physical domain";
        throw Error(ErrorCode::domain_violation, msg.str());
    }
    return wf.norm * unnormalized(wf, x);
}

Complex log_derivative(const ClosedFormWavefunction& wf, Complex x) {
    const Complex y = wf.change.y_of_x(x);
    Complex s = 0.0;
    for (const auto& [pole, e] : wf.exponents) s += e / (y - pole);
    if (wf.gaussian_exponent) s -= *wf.gaussian_exponent * y;
    const auto [p, dp] = polynomial_with_derivative(wf, y);
    s += dp / p;
    return wf.change.dy_dx(x) * s;
}

double inner_product(const ClosedFormWavefunction& a, const ClosedFormWavefunction& b) {
    return integrate_domain(a.x_domain, [&](double x) { return wavefunction_eval(a, x) * wavefunction_eval(b, x); });
}

}  // namespace qhj
