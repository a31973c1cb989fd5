#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "wallcross/kgeom.hpp"
#include "wallcross/tables.hpp"

namespace wallcross {

struct Splitting {
    long k1 = 0, k2 = 0;
    Rational beta1, beta2, m1, m2;
    Rational chi;  // chi(v2, v1)
    LineBW wall;
    Rational term;  // filled by method1

    ChernData v1(const GeometryParams& g) const { return negate(twist(ChernData(1, 0, -beta1, -m1), Rational(k1), g)); }
    ChernData v2(const GeometryParams& g) const { return twist(ChernData(1, 0, -beta2, -m2), Rational(k2), g); }
};

struct MvBounds {
    Rational beta_max;  // on beta'.H
    Rational m_max;
};

inline long rank0_k(const ChernData& v, const GeometryParams& g) {
    require_rank0_dim2(v);
    if (v.c <= 0) fail(ErrorKind::NotRankZeroDim2, "ch1.H^2 must be positive: " + v.str());
    const Rational k = v.c / g.H3();
    if (!is_integer(k)) fail(ErrorKind::InvalidArgument, "ch1 is not a multiple of H: " + v.str());
    return to_long(k.get_num());
}

inline MvBounds mv_bounds(const ChernData& v, const GeometryParams& g) {
    const Rational k = Rational(rank0_k(v, g));
    return {k / 2 - 1 / g.H3(), k * (k + 1) / 6};
}

// Both inequalities of the M(v) definition with D' = k_i H, so D'^2.H = k_i^2 H^3.
inline bool in_Mv(const ChernData& v, long k_i, const Rational& beta_i, const Rational& m_signed, const GeometryParams& g) {
    const Rational H3 = g.H3();
    const Rational kk(k_i);
    const Rational lhs = kk * kk / 2 - kk * kk * H3 / (2 * H3) + beta_i / H3;
    const Rational rhs = v.c / (2 * H3 * H3) - 1 / (H3 * H3);
    const Rational m_rhs = v.c * (v.c + H3) / (6 * H3 * H3);
    return lhs <= rhs && m_signed <= m_rhs;
}

inline bool q_negative(const ChernData& v, const GeometryParams& g) { return q_of(v, g) < 0; }

inline bool bound_ok(const ChernData& v, const GeometryParams& g) {
    require_rank0_dim2(v);
    const Rational H3 = g.H3();
    const Rational Q = q_of(v, g);
    const Rational c = v.c;
    const bool form1 = H3 * H3 * Q < c + 2 / c - Rational(5, 2) - 2 / (c * c);
    const Rational k = c / H3;
    const Rational t = k - 1 / H3 + 2 / (k * H3 * H3);
    const bool form2 = Q < k * k / 2 - t * t / 2;
    if (form1 != form2) fail(ErrorKind::InvalidArgument, "the two bound forms disagree for " + v.str());
    return form1;
}

// Upper bound on (-1)^{i+1} m_i for a factor with curve degree beta.
inline Rational castelnuovo_bound(const Rational& beta, const GeometryParams& g) {
    return Rational(2, 3) * beta * (beta + 1 / (2 * g.H3()));
}

struct SplittingScan {
    std::vector<Splitting> splittings;
    long pruned_by_wall_check = 0;
};

// Curve classes have integral H-degree and ch3 of an ideal sheaf is integral, so the beta/m
// lattice points that are not integers carry no factor classes and are skipped.
inline SplittingScan enumerate_splittings(const ChernData& v, const GeometryParams& g) {
    const long k = rank0_k(v, g);
    SplittingScan scan;
    if (q_negative(v, g)) return scan;
    const Rational H3 = g.H3();
    const MvBounds mb = mv_bounds(v, g);
    const LineBW lf = lf_rank0(v, g);
    const Rational grad = v.s / v.c;

    std::vector<Rational> betas;
    for (Rational b(0); b <= mb.beta_max; b += Rational(1, g.beta_den)) {
        b.canonicalize();
        if (is_integer(b)) betas.push_back(b);
    }
    for (const auto& b1 : betas)
        for (const auto& b2 : betas) {
            const Rational twice_k1 = (v.s + b2 - b1) * 2 / (Rational(k) * H3) - k;
            if (!is_integer(twice_k1) || mpz_odd_p(twice_k1.get_num_mpz_t())) continue;
            const long k1 = to_long(twice_k1.get_num()) / 2;
            const long k2 = k1 + k;
            const Rational K1(k1), K2(k2);
            const Rational base = (K2 * K2 * K2 - K1 * K1 * K1) * H3 / 6 - K2 * b2 + K1 * b1;
            const Rational m1_hi = std::min(mb.m_max, castelnuovo_bound(b1, g));
            const Rational m1_lo = v.d - base - std::min(mb.m_max, castelnuovo_bound(b2, g));
            for (Integer m1z = ceil_q(m1_lo); Rational(m1z) <= m1_hi; ++m1z) {
                const Rational m1(m1z);
                const Rational m2 = base + m1 - v.d;
                if (!is_integer(m2)) continue;
                if (!in_Mv(v, k1, b1, m1, g) || !in_Mv(v, k2, b2, -m2, g)) continue;
                Splitting sp;
                sp.k1 = k1;
                sp.k2 = k2;
                sp.beta1 = b1;
                sp.beta2 = b2;
                sp.m1 = m1;
                sp.m2 = m2;
                const ChernData v1 = sp.v1(g), v2 = sp.v2(g);
                if (v1 + v2 != v) fail(ErrorKind::InvalidArgument, "splitting does not sum to v");
                sp.chi = euler_pairing(v2, v1, g);
                sp.wall = LineBW::with_gradient(grad, pi(v2, g));
                if (sp.wall.c0 < lf.c0 || !line_geometry(sp.wall).intersects_U) {
                    ++scan.pruned_by_wall_check;
                    continue;
                }
                scan.splittings.push_back(sp);
            }
        }
    return scan;
}

struct Method1Result {
    Rational value;
    bool vanishing = false;  // Q(v) < 0
    std::vector<Splitting> terms;
    std::vector<std::string> diagnostics;
};

inline Method1Result method1(const ChernData& v, const TableSet& tables, const GeometryParams& g) {
    rank0_k(v, g);
    Method1Result res;
    if (q_negative(v, g)) {
        res.vanishing = true;
        res.value = 0;
        res.diagnostics.push_back("vanishing: Q(v) < 0");
        return res;
    }
    if (!bound_ok(v, g)) fail(ErrorKind::BoundViolated, "(H^3)^2 Q(v) bound fails for " + v.str());
    if (q_of(v, g) == 0) res.diagnostics.push_back("Q(v) = 0: boundary case, strictly semistables not excluded by the bound");

    TableView view(tables, g.tors);
    SplittingScan scan = enumerate_splittings(v, g);
    if (scan.pruned_by_wall_check)
        res.diagnostics.push_back("wall check pruned " + std::to_string(scan.pruned_by_wall_check) + " splitting(s)");
    const Rational tors2 = Rational(g.tors * g.tors);
    bool integral_inputs = true;
    for (auto& sp : scan.splittings) {
        const Rational P = view.pt(-sp.m1, sp.beta1);
        const Rational I = view.dt1(sp.m2, sp.beta2);
        integral_inputs = integral_inputs && is_integer(P) && is_integer(I);
        sp.term = P * I == 0 ? Rational(0) : Rational(tors2 * sign_pow(sp.chi - 1) * sp.chi * P * I);
        res.value += sp.term;
    }
    view.throw_if_missing();
    res.terms = std::move(scan.splittings);
    if (integral_inputs && g.tors == 1 && !is_integer(res.value))
        res.diagnostics.push_back("warning: non-integral result " + to_string(res.value) + " from integral tables");
    return res;
}

struct WallGroup {
    LineBW line;
    std::vector<Splitting> splittings;
};

struct WallsReport {
    ChernData v;
    LineBW lf, lv;
    std::vector<WallGroup> walls;
};

inline WallsReport walls_report(const ChernData& v, const GeometryParams& g) {
    WallsReport rep{v, lf_rank0(v, g), lv_line(v, g), {}};
    for (const auto& sp : enumerate_splittings(v, g).splittings) {
        auto it = std::find_if(rep.walls.begin(), rep.walls.end(), [&](const WallGroup& w) { return w.line == sp.wall; });
        if (it == rep.walls.end()) rep.walls.push_back({sp.wall, {sp}});
        else it->splittings.push_back(sp);
    }
    std::sort(rep.walls.begin(), rep.walls.end(), [](const WallGroup& a, const WallGroup& b) { return a.line.c0 < b.line.c0; });
    return rep;
}

}  // namespace wallcross
