#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "wallcross/errors.hpp"
#include "wallcross/rational.hpp"

namespace wallcross {

struct GeometryParams {
    long h3 = 5;
    long c2h = 50;
    long tors = 1;
    long beta_den = 2;
    long m_den = 6;

    static GeometryParams quintic() { return GeometryParams{}; }

    // chi(O_X(n)) = h3 n^3/6 + c2h n/12 must be integral for every n.
    void validate() const {
        if (h3 < 1) fail(ErrorKind::InvalidGeometry, "h3 must be >= 1");
        if (tors < 1) fail(ErrorKind::InvalidGeometry, "tors must be >= 1");
        if (beta_den < 1 || m_den < 1) fail(ErrorKind::InvalidGeometry, "lattice denominators must be >= 1");
        for (long n = -10; n <= 10; ++n) {
            Rational chi = make_q(h3 * n * n * n, 6) + make_q(c2h * n, 12);
            chi.canonicalize();
            if (!is_integer(chi))
                fail(ErrorKind::InvalidGeometry,
                     "chi(O(" + std::to_string(n) + ")) = " + to_string(chi) + " is not integral");
        }
    }

    Rational H3() const { return Rational(h3); }
};

// (ch0, ch1.H^2, ch2.H, ch3)
struct ChernData {
    Rational r, c, s, d;

    ChernData() = default;
    ChernData(Rational r_, Rational c_, Rational s_, Rational d_)
        : r(std::move(r_)), c(std::move(c_)), s(std::move(s_)), d(std::move(d_)) {}

    bool is_zero() const { return r == 0 && c == 0 && s == 0 && d == 0; }

    friend ChernData operator+(const ChernData& a, const ChernData& b) {
        return {a.r + b.r, a.c + b.c, a.s + b.s, a.d + b.d};
    }
    friend ChernData operator-(const ChernData& a, const ChernData& b) {
        return {a.r - b.r, a.c - b.c, a.s - b.s, a.d - b.d};
    }
    friend ChernData operator*(const Rational& k, const ChernData& a) {
        return {k * a.r, k * a.c, k * a.s, k * a.d};
    }
    friend bool operator==(const ChernData& a, const ChernData& b) {
        return a.r == b.r && a.c == b.c && a.s == b.s && a.d == b.d;
    }
    friend bool operator!=(const ChernData& a, const ChernData& b) { return !(a == b); }
    // Lexicographic; only used to give containers a canonical order.
    friend bool operator<(const ChernData& a, const ChernData& b) {
        if (a.r != b.r) return a.r < b.r;
        if (a.c != b.c) return a.c < b.c;
        if (a.s != b.s) return a.s < b.s;
        return a.d < b.d;
    }

    std::string str() const {
        return "(" + to_string(r) + "," + to_string(c) + "," + to_string(s) + "," + to_string(d) + ")";
    }
};

inline std::ostream& operator<<(std::ostream& os, const ChernData& v) { return os << v.str(); }

// ch(v) * e^{aH}
inline ChernData twist(const ChernData& v, const Rational& a, const GeometryParams& g) {
    const Rational H3 = g.H3();
    const Rational a2 = a * a / 2;
    const Rational a3 = a * a * a / 6;
    return {v.r, v.c + a * v.r * H3, v.s + a * v.c + a2 * v.r * H3, v.d + a * v.s + a2 * v.c + a3 * v.r * H3};
}

inline ChernData dualize(const ChernData& v) { return {v.r, -v.c, v.s, -v.d}; }
inline ChernData negate(const ChernData& v) { return {-v.r, -v.c, -v.s, -v.d}; }

inline ChernData line_bundle(const Rational& a, const GeometryParams& g) {
    return twist(ChernData(1, 0, 0, 0), a, g);
}

inline Rational euler_pairing(const ChernData& e1, const ChernData& e2, const GeometryParams& g) {
    const Rational H3 = g.H3();
    return e1.r * e2.d - e2.r * e1.d + (e2.c * e1.s - e1.c * e2.s) / H3 +
           Rational(g.c2h) / (12 * H3) * (e1.r * e2.c - e2.r * e1.c);
}

// Monic polynomial (or zero) with coefficients in descending powers; coeffs.size() == degree + 1.
struct PolyOrderKey {
    int degree = 0;
    std::vector<Rational> coeffs{Rational(0)};

    // Higher degree first; equal degrees compare by value at large t.
    friend bool operator<(const PolyOrderKey& a, const PolyOrderKey& b) {
        if (a.degree != b.degree) return a.degree > b.degree;
        for (std::size_t i = 0; i < a.coeffs.size(); ++i)
            if (a.coeffs[i] != b.coeffs[i]) return a.coeffs[i] < b.coeffs[i];
        return false;
    }
    friend bool operator==(const PolyOrderKey& a, const PolyOrderKey& b) {
        return a.degree == b.degree && a.coeffs == b.coeffs;
    }
    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            if (i) out += " ";
            out += to_string(coeffs[i]);
        }
        return "[" + out + "]";
    }
};

// P(t) = a[0] + a[1] t + a[2] t^2 + a[3] t^3
struct HilbertPoly {
    std::array<Rational, 4> a;

    int degree() const {
        for (int i = 3; i >= 0; --i)
            if (a[i] != 0) return i;
        return 0;
    }
    Rational operator()(const Rational& t) const { return a[0] + t * (a[1] + t * (a[2] + t * a[3])); }

    PolyOrderKey reduced() const {
        const int deg = degree();
        PolyOrderKey k;
        k.degree = deg;
        k.coeffs.clear();
        for (int i = deg; i >= 0; --i) k.coeffs.push_back(a[deg] == 0 ? Rational(0) : Rational(a[i] / a[deg]));
        return k;
    }

    // Constant term dropped before normalizing; degree-0 input gives the zero polynomial.
    PolyOrderKey tilt_reduced() const {
        PolyOrderKey k = reduced();
        if (k.degree == 0) {
            k.coeffs = {Rational(0)};
            return k;
        }
        k.coeffs.back() = 0;
        return k;
    }
};

inline HilbertPoly hilbert_poly(const ChernData& v, const GeometryParams& g) {
    if (v.is_zero()) fail(ErrorKind::ZeroClass, "hilbert_poly of the zero class");
    const Rational H3 = g.H3();
    const Rational c2h(g.c2h);
    HilbertPoly p;
    p.a[3] = v.r * H3 / 6;
    p.a[2] = v.c / 2;
    p.a[1] = v.s + c2h * v.r / 12;
    p.a[0] = v.d + c2h * v.c / (12 * H3);
    return p;
}

// chi(O(t), v) integral for every integer t; a cubic is integer-valued iff it is so at 4 consecutive integers.
inline bool is_integral_class(const ChernData& v, const GeometryParams& g) {
    if (v.is_zero()) return true;
    const HilbertPoly p = hilbert_poly(v, g);
    for (int t = 0; t < 4; ++t)
        if (!is_integer(p(Rational(t)))) return false;
    return true;
}

struct ExtSlope {
    bool infinite = false;
    Rational value;

    static ExtSlope inf() { return ExtSlope{true, Rational(0)}; }
    static ExtSlope of(Rational q) { return ExtSlope{false, std::move(q)}; }

    friend bool operator==(const ExtSlope& a, const ExtSlope& b) {
        if (a.infinite || b.infinite) return a.infinite == b.infinite;
        return a.value == b.value;
    }
    friend bool operator<(const ExtSlope& a, const ExtSlope& b) {
        if (a.infinite) return false;
        if (b.infinite) return true;
        return a.value < b.value;
    }

    std::string str() const { return infinite ? std::string("+inf") : to_string(value); }
};

inline ExtSlope mu_H(const ChernData& v, const GeometryParams& g) {
    if (v.r == 0) return ExtSlope::inf();
    return ExtSlope::of(v.c / (v.r * g.H3()));
}

inline ExtSlope nu_H(const ChernData& v) {
    if (v.r != 0) fail(ErrorKind::NuHRankNonzero, "nu_H needs rank 0, got " + v.str());
    if (v.c == 0) return ExtSlope::inf();
    return ExtSlope::of(v.s / v.c);
}

inline bool in_U(const Rational& b, const Rational& w) { return w > b * b / 2; }

inline ExtSlope nu_bw(const ChernData& v, const Rational& b, const Rational& w, const GeometryParams& g) {
    if (!in_U(b, w))
        fail(ErrorKind::OutsideU, "(b,w) = (" + to_string(b) + "," + to_string(w) + ") is not above the parabola");
    const Rational H3 = g.H3();
    const Rational den = v.c - b * v.r * H3;
    if (den == 0) return ExtSlope::inf();
    return ExtSlope::of((v.s - w * v.r * H3) / den);
}

inline Rational delta_H(const ChernData& v, const GeometryParams& g) { return v.c * v.c - 2 * v.s * v.r * g.H3(); }

inline void require_rank0_dim2(const ChernData& v) {
    if (v.r != 0 || v.c == 0) fail(ErrorKind::NotRankZeroDim2, "expected rank 0 with ch1 != 0, got " + v.str());
}

inline Rational q_of(const ChernData& v, const GeometryParams& g) {
    require_rank0_dim2(v);
    const Rational k = v.c / g.H3();
    const Rational sc = v.s / v.c;
    return k * k / 2 + 6 * sc * sc - 12 * v.d / v.c;
}

// Half the BMT form, written in its linear-in-(b,w) shape.
inline Rational bmt_form(const ChernData& v, const Rational& b, const Rational& w, const GeometryParams& g) {
    const Rational C0 = v.r * g.H3(), C1 = v.c, C2 = v.s, C3 = v.d;
    return delta_H(v, g) * w + (3 * C0 * C3 - C1 * C2) * b + (2 * C2 * C2 - 3 * C1 * C3);
}

struct PointBW {
    Rational b, w;
    friend bool operator==(const PointBW& p, const PointBW& q) { return p.b == q.b && p.w == q.w; }
};

struct LineBW {
    bool vertical = false;
    Rational g;   // gradient
    Rational c0;  // intercept, or the b-value of a vertical line

    static LineBW through(const PointBW& p, const PointBW& q) {
        if (p.b == q.b) {
            if (p.w == q.w) fail(ErrorKind::DegenerateLine, "line through coincident points");
            return LineBW{true, Rational(0), p.b};
        }
        Rational grad = (q.w - p.w) / (q.b - p.b);
        return LineBW{false, grad, p.w - grad * p.b};
    }
    static LineBW with_gradient(const Rational& grad, const PointBW& p) {
        return LineBW{false, grad, p.w - grad * p.b};
    }

    Rational at(const Rational& b) const {
        if (vertical) fail(ErrorKind::InvalidArgument, "evaluating a vertical line");
        return g * b + c0;
    }
    bool contains(const PointBW& p) const { return vertical ? p.b == c0 : p.w == g * p.b + c0; }
    bool point_above_or_on(const PointBW& p) const {
        if (vertical) fail(ErrorKind::InvalidArgument, "above/below is undefined for a vertical line");
        return p.w >= g * p.b + c0;
    }
    friend bool operator==(const LineBW& a, const LineBW& b) {
        return a.vertical == b.vertical && a.c0 == b.c0 && (a.vertical || a.g == b.g);
    }
    std::string str() const {
        if (vertical) return "b = " + to_string(c0);
        return "w = " + to_string(g) + "*b + " + to_string(c0);
    }
};

inline LineBW bmt_line(const ChernData& v, const GeometryParams& g) {
    const Rational delta = delta_H(v, g);
    if (delta == 0) fail(ErrorKind::DegenerateLine, "Delta_H = 0 for " + v.str());
    const Rational C0 = v.r * g.H3(), C1 = v.c, C2 = v.s, C3 = v.d;
    return LineBW{false, -(3 * C0 * C3 - C1 * C2) / delta, -(2 * C2 * C2 - 3 * C1 * C3) / delta};
}

inline PointBW pi(const ChernData& v, const GeometryParams& g) {
    if (v.r == 0) fail(ErrorKind::RankZeroProjection, "Pi undefined for rank 0: " + v.str());
    return {v.c / (v.r * g.H3()), v.s / (v.r * g.H3())};
}

inline PointBW pi_prime(const ChernData& v) {
    if (v.c == 0) fail(ErrorKind::InvalidArgument, "Pi' needs ch1 != 0");
    return {2 * v.s / v.c, 3 * v.d / v.c};
}

// With k = c/H3 and sn = s/H3: w = (sn/k) b + k^2/8 - sn^2/(2k^2).
inline LineBW lv_line(const ChernData& v, const GeometryParams& g) {
    require_rank0_dim2(v);
    if (v.c < 0) fail(ErrorKind::NotRankZeroDim2, "lv_line needs ch1.H^2 > 0");
    const Rational k = v.c / g.H3();
    const Rational sn = v.s / g.H3();
    return LineBW{false, sn / k, k * k / 8 - sn * sn / (2 * k * k)};
}

inline LineBW lf_rank0(const ChernData& v, const GeometryParams& g) {
    LineBW l = lv_line(v, g);
    l.c0 -= q_of(v, g) / 4;
    return l;
}

// p + q*sqrt(rad)
struct QuadValue {
    Rational p, q;
    Integer rad;

    static QuadValue rational(Rational x) { return QuadValue{std::move(x), Rational(0), Integer(0)}; }

    static int sign_of(const Rational& a, const Rational& b, const Integer& r) {
        const int sa = sgn(a);
        const int sb = (r == 0) ? 0 : sgn(b);
        if (sb == 0) return sa;
        if (sa == 0 || sa == sb) return sb;
        const Rational lhs = a * a;
        const Rational rhs = b * b * Rational(r);
        if (lhs == rhs) return 0;
        return lhs > rhs ? sa : sb;
    }

    int compare(const Rational& x) const { return sign_of(p - x, q, rad); }
    int compare(const QuadValue& o) const {
        if (o.q == 0 || o.rad == 0) return compare(o.p);
        if (q == 0 || rad == 0) return -o.compare(p);
        if (o.rad != rad) fail(ErrorKind::InvalidArgument, "QuadValue comparison with different radicands");
        return sign_of(p - o.p, q - o.q, rad);
    }
    double approx() const { return p.get_d() + q.get_d() * std::sqrt(rad.get_d()); }
    std::string str() const {
        if (q == 0 || rad == 0) return to_string(p);
        const Rational aq = q > 0 ? Rational(q) : Rational(-q);
        return to_string(p) + (q > 0 ? " + " : " - ") + to_string(aq) + "*sqrt(" + rad.get_str() + ")";
    }
};

// sqrt(x) = coef * sqrt(rad) with integer rad; small square factors are pulled out.
inline std::pair<Rational, Integer> sqrt_rational(const Rational& x) {
    if (x < 0) fail(ErrorKind::InvalidArgument, "sqrt of a negative rational");
    Integer n = x.get_num() * x.get_den();
    Rational coef(1, x.get_den());
    coef.canonicalize();
    if (n == 0) return {Rational(0), Integer(0)};
    Integer root;
    mpz_sqrt(root.get_mpz_t(), n.get_mpz_t());
    if (root * root == n) return {coef * Rational(root), Integer(1)};
    for (Integer p = 2; p * p <= n && p < 10000; ++p) {
        while (n % (p * p) == 0) {
            n /= p * p;
            coef *= Rational(p);
        }
    }
    return {coef, n};
}

struct LineGeometry {
    bool intersects_U = false;
    // left and right b-values where the line meets w = b^2/2
    std::optional<std::pair<QuadValue, QuadValue>> boundary_b_values;
};

inline LineGeometry line_geometry(const LineBW& l) {
    LineGeometry out;
    if (l.vertical) {
        out.intersects_U = true;
        return out;
    }
    const Rational disc = l.g * l.g + 2 * l.c0;
    out.intersects_U = disc > 0;
    if (disc >= 0) {
        auto [coef, rad] = sqrt_rational(disc);
        out.boundary_b_values = std::make_pair(QuadValue{l.g, -coef, rad}, QuadValue{l.g, coef, rad});
    }
    return out;
}

inline bool restricted_bg_ok(const Rational& b, const Rational& w) {
    const Rational fl(floor_q(b));
    return w > b * b / 2 + (b - fl) * (fl - b + 1) / 2;
}

}  // namespace wallcross
