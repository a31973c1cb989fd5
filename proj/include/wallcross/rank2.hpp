#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wallcross/decomposition.hpp"
#include "wallcross/jswcf.hpp"
#include "wallcross/kgeom.hpp"
#include "wallcross/rank0_inductive.hpp"
#include "wallcross/tables.hpp"

namespace wallcross {

// w = twist(alpha, -shift) with ch1(w) = H (odd) or 0 (even).
struct Rank2Reduction {
    ChernData alpha, w;
    long k = 0;
    bool odd = false;
    Rational shift;
};

inline Rank2Reduction reduce_rank2(const ChernData& alpha, const GeometryParams& g) {
    if (alpha.r != 2) fail(ErrorKind::InvalidArgument, "rank-2 class expected: " + alpha.str());
    const Rational kq = alpha.c / g.H3();
    if (!is_integer(kq)) fail(ErrorKind::InvalidArgument, "ch1 is not a multiple of H: " + alpha.str());
    Rank2Reduction r;
    r.alpha = alpha;
    r.k = to_long(kq.get_num());
    r.odd = r.k % 2 != 0;
    r.shift = r.odd ? make_q(r.k - 1, 2) : make_q(r.k, 2);
    r.w = twist(alpha, -r.shift, g);
    return r;
}

// (1, kappa H, beta, m) = e^{kappa H}(1, 0, -deg, -m_dt).
inline HeadLookup dt1_conversion(const ChernData& a, const GeometryParams& g) {
    const Rational H3 = g.H3();
    const Rational kappa = a.c / H3;
    HeadLookup out;
    out.kind = TableKind::DT1;
    out.deg = kappa * kappa * H3 / 2 - a.s;
    out.m = kappa * kappa * kappa * H3 / 6 - kappa * out.deg - a.d;
    return out;
}

inline ChernData dt1_class(long kappa, const Rational& m_dt, const Rational& deg_dt, const GeometryParams& g) {
    return twist(ChernData(1, 0, -deg_dt, -m_dt), Rational(kappa), g);
}

inline LineBW js_line(const ChernData& wn, long n, const GeometryParams& g) {
    const PointBW a = pi(wn, g), o = pi(line_bundle(Rational(-n), g), g);
    if (a.b == o.b) fail(ErrorKind::DegenerateLfLine, "Pi(w_n) and Pi(O(-n)) share b");
    return LineBW::with_gradient((a.w - o.w) / (a.b - o.b), a);
}

enum class TiltCorrection {
    Engine,   // two-factor wall-crossing coefficient, equals gieseker_tilt_below
    Printed,  // (-1)^{m1-m2}(m1-m2) I I as displayed, twice the engine weight
};

struct Rank2Options {
    bool odd_inclusive = true;    // parts with nu_H = mu(l_f) kept (limit from just below l_f)
    bool even_inclusive = false;  // parts with nu_H = mu(l_JS) dropped (limit from just above l_JS)
    TiltCorrection correction = TiltCorrection::Engine;
    InductiveOptions rank0;
    Rank0Strategy rank0_strategy = Rank0Strategy::DirectFirst;
    bool keep_terms = false;
};

struct Rank2NValidation {
    Rational chi;
    std::vector<std::pair<ErrorKind, std::string>> failures;
    bool ok() const { return failures.empty(); }
};

inline Rank2NValidation validate_rank2_n(const Rank2Reduction& red, long n, const GeometryParams& g) {
    Rank2NValidation out;
    if (n < 1) {
        out.failures.push_back({ErrorKind::NSufficiencyFailed, "n must be >= 1"});
        return out;
    }
    out.chi = euler_pairing(line_bundle(Rational(-n), g), red.w, g);
    if (out.chi == 0) out.failures.push_back({ErrorKind::ChiZero, "chi(O(-n), w) = 0 at n = " + std::to_string(n)});
    const ChernData wn = red.w - line_bundle(Rational(-n), g);
    if (red.odd) {
        if (delta_H(wn, g) == 0) {
            out.failures.push_back({ErrorKind::DegenerateLfLine, "Delta_H(w_n) = 0"});
            return out;
        }
        // l_f(w_n) must cross the boundary of U at b2 < 0 < b1 with b1 - b2 > n
        const LineBW lf = bmt_line(wn, g);
        const Rational disc = lf.g * lf.g + 2 * lf.c0;
        if (lf.c0 <= 0 || 4 * disc <= Rational(n * n))
            out.failures.push_back({ErrorKind::NSufficiencyFailed, "l_f(w_n) does not span a b-gap wider than n"});
    } else if (n < 2) {
        out.failures.push_back({ErrorKind::NSufficiencyFailed, "even case needs n >= 2"});
    }
    return out;
}

struct ATildeContext {
    ChernData wn;
    long n = 1;
    bool odd = true;
};

inline DecompositionProblem a_tilde_problem(const ATildeContext& ctx, const ChernData& target, const Rational& mu, bool inclusive,
                                            const GeometryParams& g) {
    DecompositionProblem pb;
    pb.target = target;
    pb.head_rank = 1;
    if (ctx.odd) {
        pb.governing = bmt_line(ctx.wn, g);
        pb.kappa_lo = 1;
        pb.kappa_hi = ctx.n;
    } else {
        pb.governing = js_line(ctx.wn, ctx.n, g);
        pb.kappa_lo = 0;
        pb.kappa_hi = ctx.n - 1;
    }
    pb.part_k_max = ctx.n;
    pb.filter = SlopeFilter{mu, false, inclusive};
    pb.chi_ascending = false;
    pb.convert = [g](const ChernData& h) { return dt1_conversion(h, g); };
    return pb;
}

inline CoefficientResult a_tilde_coefficient(const ATildeContext& ctx, const ChernData& target, const Rational& mu, bool inclusive,
                                             const TableSet& tables, const RankZeroProvider& j_rank0, const GeometryParams& g,
                                             bool keep_terms = false) {
    return decomposition_coefficient(a_tilde_problem(ctx, target, mu, inclusive, g), tables, j_rank0, g, keep_terms);
}

// Coefficient of J(v1) J(v1p) J(O(-n)[1]) summed over the distinct orderings of the three factors,
// crossing the wall where all three share nu_{b,w}.
inline Rational c_pair_coeff(const ChernData& v1, const ChernData& v1p, long n, const GeometryParams& g) {
    if (v1.r == 0 || v1p.r == 0) fail(ErrorKind::NotOnWall, "rank-0 factors have no point Pi in this model");
    const ChernData shifted = negate(line_bundle(Rational(-n), g));
    const PointBW o = pi(shifted, g), p1 = pi(v1, g), p2 = pi(v1p, g);
    if (p1.b == o.b) fail(ErrorKind::NotOnWall, "Pi(v1) and Pi(O(-n)) share b");
    const Rational grad = (p1.w - o.w) / (p1.b - o.b);
    const LineBW wall = LineBW::with_gradient(grad, o);
    if (wall.at(p2.b) != p2.w) fail(ErrorKind::NotOnWall, "Pi(v1') is off the line through Pi(v1) and Pi(O(-n))");
    // Pi(O(-n)) is on the boundary of U; the chord's other end is at b = 2 grad + n, so its midpoint is b = grad.
    const Rational b = wall.g;
    const Rational w0 = wall.at(b);
    if (!in_U(b, w0)) fail(ErrorKind::NotOnWall, "the wall never enters U");
    const std::vector<ChernData> classes{v1, v1p, shifted};
    const auto [wp, wm] = wall_sides(classes, b, w0, g);
    const SlopeAssignment s_plus = bw_slope(b, wp, g), s_minus = bw_slope(b, wm, g);
    const Pairing chi = [g](const ChernData& a, const ChernData& c) { return euler_pairing(a, c, g); };
    std::vector<ChernData> order = classes;
    std::sort(order.begin(), order.end());
    Rational total(0);
    do {
        total += wcf_tuple_coeff(order, s_plus, s_minus, chi);
    } while (std::next_permutation(order.begin(), order.end()));
    return total;
}

struct Rank2Term {
    std::string kind;  // "pair-rank0", "pair-c", "tilt"
    ChernData a, b;
    Rational coeff, value;
};

struct Rank2Result {
    Rational value;
    Rank2Reduction reduction;
    long n = 0;
    Rational chi, prefactor, mu, coefficient;
    Rational a_wn, tilt_correction, j_tilt;
    std::vector<Decomposition> decompositions;
    std::vector<Rank2Term> terms;
    EnumerationStats stats;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline Rational rank1_j(const ChernData& a, TableView& view, const GeometryParams& g) {
    const HeadLookup lk = dt1_conversion(a, g);
    if (lk.deg < 0 || !is_integer(lk.deg) || !is_integer(lk.m)) return 0;
    if (lk.m < -castelnuovo_bound(lk.deg, g)) return 0;
    return Rational(g.tors) * view.dt1(lk.m, lk.deg);
}

// Rank-1 classes (1, 0, beta/2, m') with I nonzero-capable: deg = -beta/2 integral and >= 0, m' <= castelnuovo.
inline bool half_degree(const Rank2Reduction& red, Rational& half) {
    half = red.w.s / 2;
    const Rational deg = -half;
    return is_integer(deg) && deg >= 0;
}

}  // namespace detail

inline Rank2Result rank2_odd(const ChernData& alpha, long n, const TableSet& tables, const GeometryParams& g,
                             const Rank2Options& opt = {}, Rank0Cache* cache = nullptr) {
    Rank2Result res;
    res.reduction = reduce_rank2(alpha, g);
    if (!res.reduction.odd) fail(ErrorKind::InvalidArgument, "rank2_odd needs odd ch1: " + alpha.str());
    const Rank2NValidation nv = validate_rank2_n(res.reduction, n, g);
    for (const auto& [kind, msg] : nv.failures) fail(kind, msg);
    res.n = n;
    res.chi = nv.chi;
    res.prefactor = Rational(sign_pow(nv.chi + 1)) / nv.chi;
    const ChernData wn = res.reduction.w - line_bundle(Rational(-n), g);
    res.mu = bmt_line(wn, g).g;
    Rank0Cache local;
    Rank0Resolver resolver(tables, g, opt.rank0, cache ? *cache : local, n, opt.rank0_strategy);
    CoefficientResult cr = a_tilde_coefficient(ATildeContext{wn, n, true}, wn, res.mu, opt.odd_inclusive, tables,
                                               resolver.provider(), g, opt.keep_terms);
    res.coefficient = cr.value;
    res.value = res.prefactor * cr.value;
    res.j_tilt = res.value;
    res.decompositions = std::move(cr.decompositions);
    res.stats = cr.stats;
    return res;
}

// Tilt minus Gieseker invariant of the even class alpha, from pairs of rank-1 factors of equal tilt slope.
inline Rational tilt_gieseker_correction(const Rank2Reduction& red, const TableSet& tables, const GeometryParams& g,
                                         TiltCorrection mode, std::vector<Rank2Term>* terms = nullptr) {
    if (red.odd) return 0;
    TableView view(tables, g.tors);
    Rational half;
    if (!detail::half_degree(red, half)) return 0;
    const Rational deg = -half;
    // alpha_i = e^{shift H}(1, 0, -deg, -m_i), m1 + m2 = -m(w), m1 > m2
    const Rational msum = -red.w.d;
    const Rational cast = castelnuovo_bound(deg, g);
    std::vector<FactorTuple> tuples;
    std::map<ChernData, Rational> jmap;
    Rational printed(0);
    for (Integer m2z = ceil_q(-cast); Rational(m2z) * 2 < msum; ++m2z) {
        const Rational m2(m2z), m1 = msum - m2;
        if (!is_integer(m1)) continue;
        const Rational i1 = Rational(g.tors) * view.dt1(m1, deg), i2 = Rational(g.tors) * view.dt1(m2, deg);
        const ChernData a1 = twist(ChernData(1, 0, -deg, -m1), red.shift, g);
        const ChernData a2 = twist(ChernData(1, 0, -deg, -m2), red.shift, g);
        if (i1 == 0 || i2 == 0) continue;
        const Rational diff = m1 - m2;
        printed += sign_pow(diff) * diff * i1 * i2;
        jmap[a1] = i1;
        jmap[a2] = i2;
        tuples.push_back({a1, a2});
        tuples.push_back({a2, a1});
        if (terms) terms->push_back({"tilt", a1, a2, sign_pow(diff) * diff, sign_pow(diff) * diff * i1 * i2});
    }
    view.throw_if_missing();
    if (mode == TiltCorrection::Printed) return printed;
    jmap[red.alpha] = 0;
    const JLookup j = [&jmap](const ChernData& a) -> std::optional<Rational> {
        auto it = jmap.find(a);
        if (it == jmap.end()) return std::nullopt;
        return it->second;
    };
    return gieseker_tilt_below(red.alpha, tuples, j, g);
}

inline Rank2Result rank2_even(const ChernData& alpha, long n, const TableSet& tables, const GeometryParams& g,
                              const Rank2Options& opt = {}, Rank0Cache* cache = nullptr) {
    Rank2Result res;
    res.reduction = reduce_rank2(alpha, g);
    const Rank2Reduction& red = res.reduction;
    if (red.odd) fail(ErrorKind::InvalidArgument, "rank2_even needs even ch1: " + alpha.str());
    const Rank2NValidation nv = validate_rank2_n(red, n, g);
    for (const auto& [kind, msg] : nv.failures) fail(kind, msg);
    res.n = n;
    res.chi = nv.chi;
    res.prefactor = Rational(sign_pow(nv.chi + 1)) / nv.chi;
    const ChernData wn = red.w - line_bundle(Rational(-n), g);
    res.mu = js_line(wn, n, g).g;

    Rank0Cache local;
    Rank0Resolver resolver(tables, g, opt.rank0, cache ? *cache : local, n, opt.rank0_strategy);
    const RankZeroProvider j0 = resolver.provider();
    CoefficientResult cr = a_tilde_coefficient(ATildeContext{wn, n, false}, wn, res.mu, opt.even_inclusive, tables, j0, g, opt.keep_terms);
    res.coefficient = cr.value;
    res.decompositions = std::move(cr.decompositions);
    res.stats = cr.stats;

    TableView view(tables, g.tors);
    MissingKeys missing;
    Rational half;
    if (detail::half_degree(red, half)) {
        const Rational deg = -half;
        const Rational cast = castelnuovo_bound(deg, g);
        const Rational H3 = g.H3(), N(n);
        // (1, 0, half, m') with I index -m' >= -cast; the rank-0 partner needs Q >= 0.
        const Rational c2 = N * H3;
        const Rational s2 = red.w.s - half - N * N * H3 / 2;
        const Rational d2_max = c2 * N * N / 24 + s2 * s2 / (2 * c2);
        const Rational m_lo = red.w.d + N * N * N * H3 / 6 - d2_max;
        for (Integer mz = ceil_q(m_lo); Rational(mz) <= cast; ++mz) {
            const ChernData v1(1, 0, half, Rational(mz));
            const ChernData v2 = wn - v1;
            const Rational j1 = detail::rank1_j(v1, view, g);
            if (j1 == 0) continue;
            Rational j2;
            try {
                j2 = j0(v2);
            } catch (const IncompleteInputError& e) {
                missing.add(e);
                continue;
            }
            if (j2 == 0) continue;
            const Rational chi = euler_pairing(v2, v1, g);
            const Rational coeff = sign_pow(chi + 1) * chi;
            res.a_wn += coeff * j1 * j2;
            res.terms.push_back({"pair-rank0", v1, v2, coeff, coeff * j1 * j2});
        }
        // v1 + v1' = w with both at (1, 0, half, .), unordered
        const Rational m_total = red.w.d;
        for (Integer mz = ceil_q(m_total - cast); Rational(mz) * 2 <= m_total; ++mz) {
            const ChernData v1(1, 0, half, Rational(mz)), v1p(1, 0, half, m_total - Rational(mz));
            const Rational j1 = detail::rank1_j(v1, view, g), j1p = detail::rank1_j(v1p, view, g);
            if (j1 == 0 || j1p == 0) continue;
            const Rational c = c_pair_coeff(v1, v1p, n, g);
            res.a_wn += c * j1 * j1p;
            res.terms.push_back({"pair-c", v1, v1p, c, c * j1 * j1p});
        }
    } else {
        res.diagnostics.push_back("beta.H of w is not twice an integral degree: no splittings on the Joyce-Song wall");
    }
    missing.add_all(view.missing());
    missing.throw_if_any();

    res.j_tilt = res.prefactor * (res.coefficient + res.a_wn);
    std::vector<Rank2Term> tilt_terms;
    res.tilt_correction = tilt_gieseker_correction(red, tables, g, opt.correction, &tilt_terms);
    res.terms.insert(res.terms.end(), tilt_terms.begin(), tilt_terms.end());
    res.value = res.j_tilt - res.tilt_correction;
    return res;
}

inline Rank2Result rank2(const ChernData& alpha, long n, const TableSet& tables, const GeometryParams& g, const Rank2Options& opt = {},
                         Rank0Cache* cache = nullptr) {
    return reduce_rank2(alpha, g).odd ? rank2_odd(alpha, n, tables, g, opt, cache) : rank2_even(alpha, n, tables, g, opt, cache);
}

}  // namespace wallcross
