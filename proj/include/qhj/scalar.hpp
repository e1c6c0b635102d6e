#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Core>

namespace qhj {

/// Exact rational scalar. Expression templates are off so the type composes
/// with Eigen's own expression machinery.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using Complex = std::complex<double>;

template <typename Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static double magnitude(double v) { return std::abs(v); }
};

template <>
struct ScalarTraits<Complex> {
    static constexpr bool exact = false;
    static double magnitude(const Complex& v) { return std::abs(v); }
};

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static double magnitude(const Rational& v) { return std::abs(static_cast<double>(v)); }
};

template <typename Scalar>
inline constexpr bool is_exact_v = ScalarTraits<Scalar>::exact;

template <typename Scalar>
double magnitude(const Scalar& v) {
    return ScalarTraits<Scalar>::magnitude(v);
}

/// Converts between the supported scalar types. Rational -> floating rounds,
/// double -> Rational is exact (every double is a dyadic rational).
template <typename To, typename From>
To scalar_cast(const From& v) {
    if constexpr (std::is_same_v<To, From>) {
        return v;
    } else if constexpr (std::is_same_v<From, Rational>) {
        if constexpr (std::is_same_v<To, Complex>)
            return Complex(static_cast<double>(v), 0.0);
        else
            return static_cast<To>(v);
    } else if constexpr (std::is_same_v<To, Rational>) {
        static_assert(std::is_same_v<From, double>, "only real values convert to Rational");
        return Rational(v);
    } else if constexpr (std::is_same_v<To, Complex>) {
        return Complex(v);
    } else {
        static_assert(std::is_same_v<To, void>, "unsupported scalar conversion");
    }
}

/// True when |value| is zero (exact scalars) or below tol * scale (floating).
template <typename Scalar>
bool negligible(const Scalar& value, double scale, double tol) {
    if constexpr (is_exact_v<Scalar>)
        return value == 0;
    else
        return magnitude(value) <= tol * scale;
}

}  // namespace qhj
