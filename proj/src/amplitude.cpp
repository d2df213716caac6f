#include "punq/amplitude.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace punq {

Rational make_rational(long num, long den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

Rational parse_rational(const std::string &text) {
    Rational q;
    if (q.set_str(text, 10) != 0) throw std::invalid_argument("bad rational literal: " + text);
    q.canonicalize();
    return q;
}

std::string rational_to_string(const Rational &q) { return q.get_str(); }

RealAlg RealAlg::operator+(const RealAlg &o) const { return {rat + o.rat, sqrt2 + o.sqrt2}; }
RealAlg RealAlg::operator-(const RealAlg &o) const { return {rat - o.rat, sqrt2 - o.sqrt2}; }

RealAlg RealAlg::operator*(const RealAlg &o) const {
    // (a + b*s)(c + d*s) = ac + 2bd + (ad + bc)*s   with s^2 = 2
    return {rat * o.rat + 2 * (sqrt2 * o.sqrt2), rat * o.sqrt2 + sqrt2 * o.rat};
}

int RealAlg::sign() const {
    int sr = sgn(rat);
    int ss = sgn(sqrt2);
    if (ss == 0) return sr;
    if (sr == 0) return ss;
    if (sr == ss) return sr;
    // Mixed signs: compare rat^2 against 2*sqrt2^2 exactly.
    Rational lhs = rat * rat;
    Rational rhs = 2 * sqrt2 * sqrt2;
    int c = cmp(lhs, rhs);
    if (c == 0) return 0; // impossible for nonzero components (sqrt2 irrational), kept for safety
    return (c > 0) ? sr : ss;
}

std::string RealAlg::to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    if (rat != 0) {
        os << rat.get_str();
        first = false;
    }
    if (sqrt2 != 0) {
        if (!first) os << (sgn(sqrt2) < 0 ? " - " : " + ");
        Rational mag = sqrt2;
        if (!first && sgn(sqrt2) < 0) mag = -mag;
        if (mag == 1)
            os << "sqrt2";
        else
            os << "(" << mag.get_str() << ")*sqrt2";
    }
    return os.str();
}

double RealAlg::to_double() const { return rat.get_d() + sqrt2.get_d() * std::sqrt(2.0); }

Amplitude Amplitude::operator+(const Amplitude &o) const { return {re + o.re, im + o.im}; }
Amplitude Amplitude::operator-(const Amplitude &o) const { return {re - o.re, im - o.im}; }

Amplitude Amplitude::operator*(const Amplitude &o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
}

Amplitude Amplitude::operator-() const {
    return {RealAlg{-re.rat, -re.sqrt2}, RealAlg{-im.rat, -im.sqrt2}};
}

Amplitude Amplitude::conj() const { return {re, RealAlg{-im.rat, -im.sqrt2}}; }

RealAlg Amplitude::norm_sq() const { return re * re + im * im; }

Amplitude Amplitude::inverse() const {
    if (is_zero()) throw std::domain_error("inverse of zero amplitude");
    // 1/x = conj(x) / |x|^2 ; |x|^2 = a + b*s real, inverted via conjugate a - b*s.
    RealAlg n = norm_sq();
    RealAlg nconj{n.rat, -n.sqrt2};
    Rational denom = n.rat * n.rat - 2 * (n.sqrt2 * n.sqrt2);
    Rational inv_d = 1 / denom;
    RealAlg scale{nconj.rat * inv_d, nconj.sqrt2 * inv_d};
    Amplitude c = conj();
    return {c.re * scale, c.im * scale};
}

int Amplitude::compare(const Amplitude &o) const {
    int c = cmp(re.rat, o.re.rat);
    if (c) return c;
    c = cmp(re.sqrt2, o.re.sqrt2);
    if (c) return c;
    c = cmp(im.rat, o.im.rat);
    if (c) return c;
    return cmp(im.sqrt2, o.im.sqrt2);
}

namespace {

// One monomial of the textual form: coefficient q times sqrt2^s * i^m.
void emit_monomial(std::ostream &os, bool &first, const Rational &q, bool s, bool m) {
    if (q == 0) return;
    Rational mag = q;
    bool neg = sgn(q) < 0;
    if (neg) mag = -mag;
    if (first) {
        if (neg) os << "-";
        first = false;
    } else {
        os << (neg ? " - " : " + ");
    }
    if (!s && !m) {
        os << mag.get_str();
        return;
    }
    // 1/2 * sqrt2 prints as isqrt2 to keep the common coefficient short.
    if (s && !m && mag == make_rational(1, 2)) {
        os << "isqrt2";
        return;
    }
    bool unit = (mag == 1);
    if (!unit) os << "(" << mag.get_str() << ")*";
    if (s) os << "sqrt2";
    if (s && m) os << "*";
    if (m) os << "i";
}

} // namespace

std::string Amplitude::to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    emit_monomial(os, first, re.rat, false, false);
    emit_monomial(os, first, re.sqrt2, true, false);
    emit_monomial(os, first, im.rat, false, true);
    emit_monomial(os, first, im.sqrt2, true, true);
    std::string body = os.str();
    // Parenthesize composite sums so the literal re-parses as one scalar.
    int parts = (re.rat != 0) + (re.sqrt2 != 0) + (im.rat != 0) + (im.sqrt2 != 0);
    if (parts > 1) return "(" + body + ")";
    return body;
}

Amplitude operator*(const Rational &q, const Amplitude &a) {
    return {RealAlg{q * a.re.rat, q * a.re.sqrt2}, RealAlg{q * a.im.rat, q * a.im.sqrt2}};
}

} // namespace punq
