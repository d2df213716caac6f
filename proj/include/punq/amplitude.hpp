#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace punq {

/// Arbitrary-precision rational, kept in lowest terms with positive
/// denominator (GMP maintains canonical form across arithmetic).
using Rational = mpq_class;

Rational make_rational(long num, long den = 1);
Rational parse_rational(const std::string &text);
std::string rational_to_string(const Rational &q);

/// Real element of Q(sqrt 2): value = rat + sqrt2 * sqrt(2).
/// Closed under +, -, *; equality is component-wise and decidable.
struct RealAlg {
    Rational rat;
    Rational sqrt2;

    RealAlg() : rat(0), sqrt2(0) {}
    RealAlg(Rational r, Rational s) : rat(std::move(r)), sqrt2(std::move(s)) {}
    static RealAlg of(long num, long den = 1) { return {make_rational(num, den), Rational(0)}; }

    bool is_zero() const { return rat == 0 && sqrt2 == 0; }
    bool operator==(const RealAlg &o) const { return rat == o.rat && sqrt2 == o.sqrt2; }
    bool operator!=(const RealAlg &o) const { return !(*this == o); }

    RealAlg operator+(const RealAlg &o) const;
    RealAlg operator-(const RealAlg &o) const;
    RealAlg operator*(const RealAlg &o) const;

    /// Sign of the real number rat + sqrt2*sqrt(2): -1, 0, or +1.
    int sign() const;

    std::string to_string() const;
    double to_double() const;
};

/// Exact element of Q(sqrt 2, i):
///   (re_rat + re_sqrt2*sqrt 2) + (im_rat + im_sqrt2*sqrt 2) * i.
/// This is the scalar field for all superposition coefficients. Values are
/// immutable in practice and safe to share; all operations are pure.
struct Amplitude {
    RealAlg re;
    RealAlg im;

    Amplitude() {}
    Amplitude(RealAlg r, RealAlg i) : re(std::move(r)), im(std::move(i)) {}

    static Amplitude zero() { return {}; }
    static Amplitude one() { return of(1); }
    static Amplitude of(long num, long den = 1) { return {RealAlg::of(num, den), RealAlg()}; }
    static Amplitude rational(const Rational &q) { return {RealAlg{q, Rational(0)}, RealAlg()}; }
    static Amplitude sqrt2() { return {RealAlg{Rational(0), Rational(1)}, RealAlg()}; }
    /// 1/sqrt(2) = sqrt(2)/2.
    static Amplitude inv_sqrt2() { return {RealAlg{Rational(0), make_rational(1, 2)}, RealAlg()}; }
    static Amplitude imag_unit() { return {RealAlg(), RealAlg::of(1)}; }

    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    bool is_one() const { return *this == one(); }
    bool operator==(const Amplitude &o) const { return re == o.re && im == o.im; }
    bool operator!=(const Amplitude &o) const { return !(*this == o); }

    Amplitude operator+(const Amplitude &o) const;
    Amplitude operator-(const Amplitude &o) const;
    Amplitude operator*(const Amplitude &o) const;
    Amplitude operator-() const;

    Amplitude conj() const;
    /// |x|^2 = x * conj(x), always a non-negative real.
    RealAlg norm_sq() const;
    /// Multiplicative inverse; throws std::domain_error on zero.
    Amplitude inverse() const;

    /// Total order on the four components (re_rat, re_sqrt2, im_rat,
    /// im_sqrt2); used only to fix deterministic canonical forms.
    int compare(const Amplitude &o) const;

    /// Renders in the CLI literal grammar, e.g. "1", "-1/2", "isqrt2",
    /// "(1/2 + (1/2)*i)". parse_amplitude Returns the same value back.
    std::string to_string() const;
    double to_double_re() const { return re.to_double(); }
    double to_double_im() const { return im.to_double(); }
};

Amplitude operator*(const Rational &q, const Amplitude &a);

} // namespace punq
