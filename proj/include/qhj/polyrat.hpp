#pragma once

// Polynomial and rational-function algebra over real, complex or exact
// rational coefficients.  Every routine is templated on the coefficient
// scalar; exact scalars give exact results (zero tests are `== 0`), floating
// scalars use the relative tolerances declared below.

#include <algorithm>
#include <initializer_list>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qhj/errors.hpp"
#include "qhj/scalar.hpp"

namespace qhj {

/// |den(pole)| must be below this fraction of the largest denominator
/// coefficient for `pole` to count as a pole.
inline constexpr double kPoleTolerance = 1e-10;
/// Relative size below which a floating remainder is treated as zero in GCD
/// and Sturm chains.
inline constexpr double kGcdTolerance = 1e-9;

template <typename Scalar>
class Poly {
public:
    using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Poly() = default;

    explicit Poly(Coeffs coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    Poly(std::initializer_list<Scalar> coeffs) : coeffs_(static_cast<Eigen::Index>(coeffs.size())) {
        Eigen::Index k = 0;
        for (const auto& c : coeffs) coeffs_(k++) = c;
        trim();
    }

    static Poly constant(const Scalar& c) { return monomial(c, 0); }

    static Poly monomial(const Scalar& c, int degree) {
        Coeffs coeffs = Coeffs::Constant(degree + 1, Scalar(0));
        coeffs(degree) = c;
        return Poly(std::move(coeffs));
    }

    /// The polynomial `y`.
    static Poly identity() { return monomial(Scalar(1), 1); }

    /// y - root
    static Poly linear_factor(const Scalar& root) { return Poly{Scalar(-root), Scalar(1)}; }

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.size() == 0; }
    const Coeffs& coeffs() const { return coeffs_; }

    Scalar operator[](int k) const {
        return (k >= 0 && k < coeffs_.size()) ? coeffs_(k) : Scalar(0);
    }

    Scalar leading() const { return is_zero() ? Scalar(0) : coeffs_(coeffs_.size() - 1); }

    double max_magnitude() const {
        double m = 0.0;
        for (Eigen::Index k = 0; k < coeffs_.size(); ++k) m = std::max(m, magnitude(coeffs_(k)));
        return m;
    }

    /// Horner evaluation; the result has the argument's type.
    template <typename T>
    T operator()(const T& x) const {
        T acc = T(0);
        for (Eigen::Index k = coeffs_.size() - 1; k >= 0; --k) acc = acc * x + scalar_cast<T>(coeffs_(k));
        return acc;
    }

    Poly derivative() const {
        if (degree() < 1) return {};
        Coeffs d(coeffs_.size() - 1);
        for (Eigen::Index k = 1; k < coeffs_.size(); ++k) d(k - 1) = coeffs_(k) * Scalar(static_cast<int>(k));
        return Poly(std::move(d));
    }

    /// Drops leading coefficients that are negligible relative to the largest one.
    Poly trimmed(double rel_tol) const {
        const double scale = max_magnitude();
        Eigen::Index n = coeffs_.size();
        while (n > 0 && negligible(coeffs_(n - 1), scale, rel_tol)) --n;
        return Poly(Coeffs(coeffs_.head(n)));
    }

    Poly monic() const {
        if (is_zero()) return *this;
        const Scalar lead = leading();
        Coeffs c = coeffs_;
        for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = c(k) / lead;
        return Poly(std::move(c));
    }

    template <typename To>
    Poly<To> cast() const {
        typename Poly<To>::Coeffs c(coeffs_.size());
        for (Eigen::Index k = 0; k < coeffs_.size(); ++k) c(k) = scalar_cast<To>(coeffs_(k));
        return Poly<To>(std::move(c));
    }

    Poly& operator+=(const Poly& other) {
        if (other.coeffs_.size() > coeffs_.size()) {
            const Eigen::Index old = coeffs_.size();
            coeffs_.conservativeResize(other.coeffs_.size());
            for (Eigen::Index k = old; k < coeffs_.size(); ++k) coeffs_(k) = Scalar(0);
        }
        coeffs_.head(other.coeffs_.size()) += other.coeffs_;
        trim();
        return *this;
    }

    Poly& operator-=(const Poly& other) { return *this += -other; }

    Poly& operator*=(const Scalar& s) {
        coeffs_ *= s;
        trim();
        return *this;
    }

    friend Poly operator-(const Poly& p) {
        Poly out = p;
        out.coeffs_ = -out.coeffs_;
        return out;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, const Scalar& s) { return a *= s; }
    friend Poly operator*(const Scalar& s, Poly a) { return a *= s; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        Coeffs c = Coeffs::Constant(a.coeffs_.size() + b.coeffs_.size() - 1, Scalar(0));
        for (Eigen::Index i = 0; i < a.coeffs_.size(); ++i)
            for (Eigen::Index j = 0; j < b.coeffs_.size(); ++j) c(i + j) += a.coeffs_(i) * b.coeffs_(j);
        return Poly(std::move(c));
    }

    friend bool operator==(const Poly& a, const Poly& b) {
        return a.coeffs_.size() == b.coeffs_.size() && a.coeffs_ == b.coeffs_;
    }

private:
    void trim() {
        Eigen::Index n = coeffs_.size();
        while (n > 0 && coeffs_(n - 1) == Scalar(0)) --n;
        if (n != coeffs_.size()) coeffs_.conservativeResize(n);
    }

    Coeffs coeffs_;
};

template <typename Scalar>
struct DivMod {
    Poly<Scalar> quotient;
    Poly<Scalar> remainder;
};

/// Long division num = q * den + r with deg r < deg den.
template <typename Scalar>
DivMod<Scalar> divmod(const Poly<Scalar>& num, const Poly<Scalar>& den) {
    if (den.is_zero()) throw std::invalid_argument("polynomial division by zero");
    const int dn = num.degree();
    const int dd = den.degree();
    if (dn < dd) return {Poly<Scalar>{}, num};

    typename Poly<Scalar>::Coeffs rem = num.coeffs();
    typename Poly<Scalar>::Coeffs quo = Poly<Scalar>::Coeffs::Constant(dn - dd + 1, Scalar(0));
    const Scalar lead = den.leading();
    for (int k = dn - dd; k >= 0; --k) {
        const Scalar q = rem(k + dd) / lead;
        quo(k) = q;
        for (int j = 0; j < dd; ++j) rem(k + j) -= q * den.coeffs()(j);
        rem(k + dd) = Scalar(0);
    }
    return {Poly<Scalar>(std::move(quo)), Poly<Scalar>(typename Poly<Scalar>::Coeffs(rem.head(dd)))};
}

/// Monic greatest common divisor by Euclid's algorithm, normalizing the
/// running remainder to monic at each step.  Floating remainders whose
/// coefficients are all below `tol` times the operand scale are taken as zero.
template <typename Scalar>
Poly<Scalar> gcd(Poly<Scalar> a, Poly<Scalar> b, double tol = kGcdTolerance) {
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    a = a.monic();
    b = b.monic();
    if (a.degree() < b.degree()) std::swap(a, b);
    while (!b.is_zero()) {
        Poly<Scalar> r = divmod(a, b).remainder;
        if constexpr (!is_exact_v<Scalar>) {
            const double scale = std::max(a.max_magnitude(), b.max_magnitude());
            if (r.max_magnitude() <= tol * scale) r = {};
            else r = r.trimmed(tol);
        }
        a = std::move(b);
        b = r.monic();
    }
    return a.monic();
}

/// Quotient of p / (y - root), discarding the remainder p(root).
template <typename Scalar>
Poly<Scalar> deflate(const Poly<Scalar>& p, const Scalar& root) {
    const int n = p.degree();
    if (n < 1) return {};
    typename Poly<Scalar>::Coeffs q(n);
    Scalar carry = p.coeffs()(n);
    for (int k = n - 1; k >= 0; --k) {
        q(k) = carry;
        carry = p.coeffs()(k) + carry * root;
    }
    return Poly<Scalar>(std::move(q));
}

/// First `count` Taylor coefficients of p about `at`, i.e. c_j in p(at + t) = sum c_j t^j.
template <typename Scalar>
std::vector<Scalar> taylor_coefficients(Poly<Scalar> p, const Scalar& at, int count) {
    std::vector<Scalar> out;
    out.reserve(count);
    for (int j = 0; j < count; ++j) {
        out.push_back(p(at));
        p = deflate(p, at);
    }
    return out;
}

template <typename Scalar>
class RationalFn {
public:
    RationalFn() : den_(Poly<Scalar>::constant(Scalar(1))) {}

    RationalFn(Poly<Scalar> num, Poly<Scalar> den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw std::invalid_argument("rational function with zero denominator");
        reduce();
    }

    explicit RationalFn(Poly<Scalar> num) : RationalFn(std::move(num), Poly<Scalar>::constant(Scalar(1))) {}

    static RationalFn constant(const Scalar& c) { return RationalFn(Poly<Scalar>::constant(c)); }

    const Poly<Scalar>& numerator() const { return num_; }
    const Poly<Scalar>& denominator() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }

    /// No common polynomial factor between numerator and denominator.
    bool is_reduced(double tol = kGcdTolerance) const { return gcd(num_, den_, tol).degree() <= 0; }

    template <typename T>
    T operator()(const T& x) const {
        return num_(x) / den_(x);
    }

    RationalFn derivative() const {
        return RationalFn(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
    }

    template <typename To>
    RationalFn<To> cast() const {
        return RationalFn<To>(num_.template cast<To>(), den_.template cast<To>());
    }

    friend RationalFn operator+(const RationalFn& a, const RationalFn& b) {
        if (a.den_ == b.den_) return RationalFn(a.num_ + b.num_, a.den_);
        return RationalFn(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RationalFn operator-(const RationalFn& a) { return RationalFn(-a.num_, a.den_); }
    friend RationalFn operator-(const RationalFn& a, const RationalFn& b) { return a + (-b); }
    friend RationalFn operator*(const RationalFn& a, const RationalFn& b) {
        return RationalFn(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RationalFn operator/(const RationalFn& a, const RationalFn& b) {
        if (b.is_zero()) throw std::invalid_argument("rational function division by zero");
        return RationalFn(a.num_ * b.den_, a.den_ * b.num_);
    }
    friend RationalFn operator*(const Scalar& s, const RationalFn& a) { return RationalFn(s * a.num_, a.den_); }
    friend RationalFn operator*(const RationalFn& a, const Scalar& s) { return s * a; }

private:
    void reduce() {
        if (num_.is_zero()) {
            den_ = Poly<Scalar>::constant(Scalar(1));
            return;
        }
        const Poly<Scalar> g = gcd(num_, den_);
        if (g.degree() > 0) {
            num_ = divmod(num_, g).quotient;
            den_ = divmod(den_, g).quotient;
        }
        const Scalar lead = den_.leading();
        num_ *= Scalar(1) / lead;
        den_ = den_.monic();
    }

    Poly<Scalar> num_;
    Poly<Scalar> den_;
};

/// Principal part of a Laurent expansion: coefficients of (y - pole)^(-k).
template <typename T>
struct LaurentData {
    T pole{};
    std::map<int, T> coefficients;
    int max_order = 0;

    T coefficient(int order) const {
        const auto it = coefficients.find(order);
        return it == coefficients.end() ? T(0) : it->second;
    }
};

/// Negative-order Laurent coefficients of r about a root of its denominator.
/// Throws NotAPole when |den(pole)| exceeds kPoleTolerance * max|den coeff|.
template <typename T, typename Scalar>
LaurentData<T> laurent_at(const RationalFn<Scalar>& r, const T& pole) {
    const Poly<T> num = r.numerator().template cast<T>();
    Poly<T> rest = r.denominator().template cast<T>();
    if (!negligible(rest(pole), rest.max_magnitude(), kPoleTolerance))
        throw Error(ErrorCode::not_a_pole, "denominator does not vanish at the requested point");

    int order = 0;
    while (rest.degree() >= 1 && negligible(rest(pole), rest.max_magnitude(), kPoleTolerance)) {
        rest = deflate(rest, pole);
        ++order;
    }

    const std::vector<T> n = taylor_coefficients(num, pole, order);
    const std::vector<T> d = taylor_coefficients(rest, pole, order);
    std::vector<T> g(order, T(0));
    for (int j = 0; j < order; ++j) {
        T acc = n[j];
        for (int i = 1; i <= j; ++i) acc -= d[i] * g[j - i];
        g[j] = acc / d[0];
    }

    LaurentData<T> out;
    out.pole = pole;
    for (int j = 0; j < order; ++j) out.coefficients[order - j] = g[j];
    out.max_order = order;
    return out;
}

/// Asymptotic expansion of a rational function as y -> infinity.
template <typename Scalar>
struct AsymptoticSeries {
    int top_power = 0;            ///< power of y carried by coefficients[0]
    std::vector<Scalar> coefficients;  ///< descending powers top_power, top_power - 1, ...

    Scalar coefficient(int power) const {
        const int idx = top_power - power;
        return (idx >= 0 && idx < static_cast<int>(coefficients.size())) ? coefficients[idx] : Scalar(0);
    }
};

/// Coefficients of y^j for j = deg(num) - deg(den) down to -depth.
template <typename Scalar>
AsymptoticSeries<Scalar> expansion_at_infinity(const RationalFn<Scalar>& r, int depth) {
    AsymptoticSeries<Scalar> out;
    const Poly<Scalar>& num = r.numerator();
    const Poly<Scalar>& den = r.denominator();
    if (num.is_zero()) {
        out.top_power = -depth;
        out.coefficients.assign(1, Scalar(0));
        return out;
    }
    const int dn = num.degree();
    const int dd = den.degree();
    out.top_power = dn - dd;
    const int count = out.top_power + depth + 1;
    if (count <= 0) return out;

    // In t = 1/y: r = y^(dn-dd) * N(t) / D(t) with N_j = num[dn-j], D_j = den[dd-j].
    out.coefficients.assign(count, Scalar(0));
    for (int j = 0; j < count; ++j) {
        Scalar acc = num[dn - j];
        for (int i = 1; i <= std::min(j, dd); ++i) acc -= den[dd - i] * out.coefficients[j - i];
        out.coefficients[j] = acc / den[dd];
    }
    return out;
}

// Sturm machinery for real root isolation of floating polynomials.

inline std::vector<Poly<double>> sturm_sequence(const Poly<double>& p) {
    std::vector<Poly<double>> seq;
    if (p.is_zero()) return seq;
    const double scale = p.max_magnitude();
    seq.push_back(p);
    seq.push_back(p.derivative());
    while (!seq.back().is_zero()) {
        Poly<double> r = -divmod(seq[seq.size() - 2], seq.back()).remainder;
        if (r.max_magnitude() <= kGcdTolerance * scale * 1e-3) r = {};
        if (r.is_zero()) break;
        seq.push_back(r);
    }
    if (seq.back().is_zero()) seq.pop_back();
    return seq;
}

inline int sign_variations(const std::vector<Poly<double>>& seq, double x) {
    int count = 0;
    int last = 0;
    for (const auto& q : seq) {
        const double v = q(x);
        const int s = (v > 0) - (v < 0);
        if (s == 0) continue;
        if (last != 0 && s != last) ++count;
        last = s;
    }
    return count;
}

/// Number of distinct real roots in (a, b].
inline int count_real_roots(const Poly<double>& p, double a, double b) {
    const auto seq = sturm_sequence(p);
    return sign_variations(seq, a) - sign_variations(seq, b);
}

/// Distinct real roots in (a, b), isolated by Sturm counts and refined by
/// bisection to absolute width `tol`.  Returned in increasing order.
inline std::vector<double> real_roots(const Poly<double>& p, double a, double b, double tol = 1e-12) {
    std::vector<double> roots;
    if (p.degree() < 1) return roots;
    const auto seq = sturm_sequence(p);
    const auto count = [&](double lo, double hi) { return sign_variations(seq, lo) - sign_variations(seq, hi); };

    std::vector<std::pair<double, double>> work{{a, b}};
    while (!work.empty()) {
        auto [lo, hi] = work.back();
        work.pop_back();
        const int c = count(lo, hi);
        if (c == 0) continue;
        if (c > 1 && hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            work.emplace_back(mid, hi);
            work.emplace_back(lo, mid);
            continue;
        }
        // One root in (lo, hi]; bisect on the Sturm count, which does not
        // need a sign change of p itself.
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (count(lo, mid) > 0) hi = mid;
            else lo = mid;
        }
        roots.push_back(0.5 * (lo + hi));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace qhj
