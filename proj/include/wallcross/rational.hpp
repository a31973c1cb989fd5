#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <regex>
#include <string>

#include "wallcross/errors.hpp"

namespace wallcross {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_q(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Accepts "p", "-p", "p/q" with q > 0 after sign handling.
inline Rational parse_rational(const std::string& text) {
    static const std::regex pattern(R"(^\s*([+-]?\d+)(?:/(\d+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) fail(ErrorKind::ParseError, "not a rational: '" + text + "'");
    Integer num(m[1].str().front() == '+' ? m[1].str().substr(1) : m[1].str());
    Integer den(1);
    if (m[2].matched) {
        den = Integer(m[2].str());
        if (den == 0) fail(ErrorKind::ParseError, "zero denominator: '" + text + "'");
    }
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline std::string to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

inline Integer floor_q(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer ceil_q(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline long to_long(const Integer& z) {
    if (!z.fits_slong_p()) fail(ErrorKind::InvalidArgument, "integer out of machine range: " + z.get_str());
    return z.get_si();
}

inline long to_long_exact(const Rational& q, const char* what) {
    if (!is_integer(q)) fail(ErrorKind::InvalidArgument, std::string(what) + " must be an integer, got " + to_string(q));
    return to_long(q.get_num());
}

// (-1)^e for integral e; the parity of a non-integral exponent is undefined.
inline int sign_pow(const Rational& e) {
    if (!is_integer(e)) fail(ErrorKind::NonIntegralChi, "(-1)^x with non-integral x = " + to_string(e));
    return mpz_odd_p(e.get_num_mpz_t()) ? -1 : 1;
}

inline Integer factorial(long n) {
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return r;
}

inline Rational pow_q(const Rational& base, long e) {
    Rational result(1);
    Rational b = base;
    if (e < 0) {
        b = 1 / b;
        e = -e;
    }
    for (long i = 0; i < e; ++i) result *= b;
    return result;
}

// Smallest lattice point (step 1/den) strictly greater than x, or >= x when inclusive.
inline Rational lattice_ceil(const Rational& x, long den, bool inclusive) {
    Rational scaled = x * den;
    Integer c = ceil_q(scaled);
    if (!inclusive && Rational(c) == scaled) c += 1;
    Rational r(c, den);
    r.canonicalize();
    return r;
}

inline Rational lattice_floor(const Rational& x, long den, bool inclusive) {
    Rational scaled = x * den;
    Integer f = floor_q(scaled);
    if (!inclusive && Rational(f) == scaled) f -= 1;
    Rational r(f, den);
    r.canonicalize();
    return r;
}

}  // namespace wallcross
