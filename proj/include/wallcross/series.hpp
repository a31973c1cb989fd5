#pragma once

#include <array>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "wallcross/errors.hpp"
#include "wallcross/rational.hpp"

namespace wallcross {

struct Monomial {
    Rational xe, ye, ze;

    Rational operator[](int i) const { return i == 0 ? xe : (i == 1 ? ye : ze); }
    friend Monomial operator+(const Monomial& a, const Monomial& b) { return {a.xe + b.xe, a.ye + b.ye, a.ze + b.ze}; }
    friend bool operator==(const Monomial& a, const Monomial& b) { return a.xe == b.xe && a.ye == b.ye && a.ze == b.ze; }
    friend bool operator<(const Monomial& a, const Monomial& b) {
        if (a.xe != b.xe) return a.xe < b.xe;
        if (a.ye != b.ye) return a.ye < b.ye;
        return a.ze < b.ze;
    }
    bool is_one() const { return xe == 0 && ye == 0 && ze == 0; }
    std::string str() const { return "x^" + to_string(xe) + " y^" + to_string(ye) + " z^" + to_string(ze); }
};

// Closed coordinate ranges [lo_i, hi_i].
struct Box {
    std::array<Rational, 3> lo, hi;

    static Box of(Rational xlo, Rational xhi, Rational ylo, Rational yhi, Rational zlo, Rational zhi) {
        return Box{{std::move(xlo), std::move(ylo), std::move(zlo)}, {std::move(xhi), std::move(yhi), std::move(zhi)}};
    }
    bool contains(const Monomial& m) const {
        for (int i = 0; i < 3; ++i)
            if (m[i] < lo[static_cast<std::size_t>(i)] || m[i] > hi[static_cast<std::size_t>(i)]) return false;
        return true;
    }
    static Box intersect(const Box& a, const Box& b) {
        Box out;
        for (std::size_t i = 0; i < 3; ++i) {
            out.lo[i] = std::max(a.lo[i], b.lo[i]);
            out.hi[i] = std::min(a.hi[i], b.hi[i]);
        }
        return out;
    }
    friend bool operator==(const Box& a, const Box& b) { return a.lo == b.lo && a.hi == b.hi; }
};

class SparseSeries {
public:
    explicit SparseSeries(Box box) : box_(std::move(box)) {}

    static SparseSeries one(const Box& box) {
        SparseSeries s(box);
        s.add_term(Monomial{}, 1);
        return s;
    }
    static SparseSeries monomial(const Box& box, const Monomial& m, const Rational& c) {
        SparseSeries s(box);
        s.add_term(m, c);
        return s;
    }

    const Box& box() const { return box_; }
    const std::map<Monomial, Rational>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    // Terms outside the box are dropped; zero coefficients are never stored.
    void add_term(const Monomial& m, const Rational& c) {
        if (c == 0 || !box_.contains(m)) return;
        auto [it, fresh] = terms_.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Rational coefficient(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    SparseSeries scaled(const Rational& k) const {
        SparseSeries out(box_);
        for (const auto& [m, c] : terms_) out.add_term(m, k * c);
        return out;
    }

    SparseSeries restricted(const Box& box) const {
        SparseSeries out(box);
        for (const auto& [m, c] : terms_) out.add_term(m, c);
        return out;
    }

    // One line per term, "<coeff> x^<r> y^<r> z^<r>", ordered by monomial.
    std::string dump() const {
        std::ostringstream out;
        for (const auto& [m, c] : terms_) out << to_string(c) << ' ' << m.str() << '\n';
        return out.str();
    }

    friend bool operator==(const SparseSeries& a, const SparseSeries& b) { return a.terms_ == b.terms_; }

private:
    Box box_;
    std::map<Monomial, Rational> terms_;
};

inline SparseSeries add(const SparseSeries& a, const SparseSeries& b) {
    SparseSeries out(Box::intersect(a.box(), b.box()));
    for (const auto& [m, c] : a.terms()) out.add_term(m, c);
    for (const auto& [m, c] : b.terms()) out.add_term(m, c);
    return out;
}

inline SparseSeries mul(const SparseSeries& a, const SparseSeries& b) {
    SparseSeries out(Box::intersect(a.box(), b.box()));
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) out.add_term(ma + mb, ca * cb);
    return out;
}

// Requires a coordinate in which every exponent of `a` has the same strict sign, so powers leave the box.
inline SparseSeries exp_series(const SparseSeries& a) {
    if (a.coefficient(Monomial{}) != 0) fail(ErrorKind::NonNilpotent, "exp of a series with a constant term");
    if (!a.empty()) {
        bool nilpotent = false;
        for (int i = 0; i < 3 && !nilpotent; ++i) {
            bool all_pos = true, all_neg = true;
            for (const auto& [m, c] : a.terms()) {
                if (m[i] <= 0) all_pos = false;
                if (m[i] >= 0) all_neg = false;
            }
            nilpotent = all_pos || all_neg;
        }
        if (!nilpotent) fail(ErrorKind::NonNilpotent, "no box coordinate grows strictly under powers");
    }
    SparseSeries result = SparseSeries::one(a.box());
    SparseSeries power = SparseSeries::one(a.box());
    Integer fact(1);
    for (long n = 1; ; ++n) {
        power = mul(power, a);
        if (power.empty()) break;
        fact *= n;
        result = add(result, power.scaled(Rational(1) / Rational(fact)));
    }
    return result;
}

struct SubstitutionRules {
    Monomial x{Rational(1), Rational(0), Rational(0)};
    Monomial y{Rational(0), Rational(1), Rational(0)};
    Monomial z{Rational(0), Rational(0), Rational(1)};
};

inline SparseSeries substitute(const SparseSeries& a, const SubstitutionRules& rules, const Box& out_box) {
    SparseSeries out(out_box);
    for (const auto& [m, c] : a.terms()) {
        Monomial t{m.xe * rules.x.xe + m.ye * rules.y.xe + m.ze * rules.z.xe,
                   m.xe * rules.x.ye + m.ye * rules.y.ye + m.ze * rules.z.ye,
                   m.xe * rules.x.ze + m.ye * rules.y.ze + m.ze * rules.z.ze};
        out.add_term(t, c);
    }
    return out;
}

// c x^a y^b z^g  ->  c g (-1)^(g-1) x^a y^b
inline SparseSeries dz_at_minus1(const SparseSeries& a) {
    Box box = a.box();
    box.lo[2] = 0;
    box.hi[2] = 0;
    SparseSeries out(box);
    for (const auto& [m, c] : a.terms()) {
        if (!is_integer(m.ze)) fail(ErrorKind::NonIntegralZExponent, "term " + to_string(c) + " " + m.str());
        const Rational sign = mpz_odd_p(m.ze.get_num_mpz_t()) ? 1 : -1;
        out.add_term(Monomial{m.xe, m.ye, Rational(0)}, c * m.ze * sign);
    }
    return out;
}

// Evaluation at a rational point; exponents must be integral.
inline Rational evaluate(const SparseSeries& a, const Rational& x, const Rational& y, const Rational& z) {
    Rational total(0);
    for (const auto& [m, c] : a.terms()) {
        total += c * pow_q(x, to_long_exact(m.xe, "x-exponent")) * pow_q(y, to_long_exact(m.ye, "y-exponent")) *
                 pow_q(z, to_long_exact(m.ze, "z-exponent"));
    }
    return total;
}

}  // namespace wallcross
