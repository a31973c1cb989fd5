#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wallcross/kgeom.hpp"
#include "wallcross/rank0_direct.hpp"
#include "wallcross/series.hpp"
#include "wallcross/tables.hpp"

namespace wallcross {

namespace detail {

// sign(a - b * k^xi) for k > 0 and rational xi = p/q, decided on q-th powers.
inline int cmp_scaled_power(const Rational& a, const Rational& b, long k, const Rational& xi) {
    if (k <= 0) fail(ErrorKind::InvalidArgument, "power base must be positive");
    const int sb = sgn(b);
    const int sa = sgn(a);
    if (sb == 0) return sa;
    if (sa != sb) return sa > sb ? 1 : -1;
    const long p = to_long(xi.get_num()), q = to_long(xi.get_den());
    const Rational lhs = pow_q(a, q);
    const Rational rhs = pow_q(b, q) * pow_q(Rational(k), p);
    // equal signs; for negative values an odd q keeps the order, an even q flips it
    int c = lhs == rhs ? 0 : (lhs < rhs ? -1 : 1);
    if (sa < 0 && q % 2 == 0) c = -c;
    return c;
}

}  // namespace detail

struct OsvParams {
    Rational xi, mu, delta;
    long kmin = 0;

    bool cond_i(const GeometryParams& g) const { return mu < 2 * delta / g.H3(); }
    bool cond_ii(long k, const GeometryParams& g) const { return delta < Rational(1, 4) - 1 / (Rational(k) * g.H3()); }
    bool cond_iii(long k, const GeometryParams& g) const {
        const Rational H3 = g.H3(), K(k);
        const Rational t = 1 - 1 / (K * H3) + 2 / (K * K * H3 * H3);
        // mu / k^xi <= 1 - t^2
        return detail::cmp_scaled_power(mu, 1 - t * t, k, xi) <= 0;
    }
    bool holds_at(long k, const GeometryParams& g) const { return cond_i(g) && cond_ii(k, g) && cond_iii(k, g); }
};

inline OsvParams params_for(const Rational& xi, const GeometryParams& g, long k_probe, long scan_limit = 100000) {
    if (xi < 1) fail(ErrorKind::InvalidArgument, "xi must be >= 1");
    if (k_probe < 1) fail(ErrorKind::NoSolution, "k_probe must be >= 1");
    const Rational H3 = g.H3();
    OsvParams p;
    p.xi = xi;
    p.delta = Rational(1, 4) - 1 / (Rational(k_probe) * H3) - Rational(1, 100);
    p.mu = 2 * p.delta / H3 - Rational(1, 100);
    if (p.delta <= 0 || p.mu <= 0)
        fail(ErrorKind::NoSolution, "k_probe = " + std::to_string(k_probe) + " leaves no room for delta, mu > 0");
    constexpr long kRun = 64;  // consecutive successes demanded before accepting a start point
    long start = 1, run = 0;
    for (long k = 1; k <= scan_limit; ++k) {
        if (p.holds_at(k, g)) {
            if (run++ == 0) start = k;
            if (run >= kRun) break;
        } else {
            run = 0;
        }
    }
    if (run < kRun) fail(ErrorKind::NoSolution, "conditions never stabilise below k = " + std::to_string(scan_limit));
    p.kmin = start - 1;
    for (long k = p.kmin + 1; k <= p.kmin + 20; ++k)
        if (!p.holds_at(k, g)) fail(ErrorKind::NoSolution, "re-validation failed at k = " + std::to_string(k));
    return p;
}

// C(k, eps) with eps = delta / k^xi: beta.H < eps k^2 and m < eps k^3 (|m| < eps k^3 when two-sided).
struct OsvRegion {
    long k = 1;
    Rational delta, xi;
    bool two_sided = false;

    static OsvRegion of(const OsvParams& p, long k, bool two_sided = false) { return OsvRegion{k, p.delta, p.xi, two_sided}; }

    bool beta_ok(const Rational& beta) const {
        const Rational K(k);
        return detail::cmp_scaled_power(delta * K * K, beta, k, xi) > 0;
    }
    bool m_ok(const Rational& m) const {
        const Rational K(k);
        const Rational bound = delta * K * K * K;
        if (detail::cmp_scaled_power(bound, m, k, xi) <= 0) return false;
        return !two_sided || detail::cmp_scaled_power(bound, -m, k, xi) > 0;
    }
    bool contains(const Rational& beta, const Rational& m) const { return beta_ok(beta) && m_ok(m); }
};

// Series monomial x^m y^beta is excluded when -(H^3/24) k^3 (1 - mu/k^xi) <= m + beta^2 / (2 k H^3).
inline bool region_excluded(long k, const OsvParams& p, const Rational& m, const Rational& beta, const GeometryParams& g) {
    const Rational H3 = g.H3(), K(k);
    const Rational base = H3 * K * K * K / 24;
    const Rational x = m + beta * beta / (2 * K * H3);
    // base * mu * k^-xi <= x + base
    return detail::cmp_scaled_power(base * p.mu, x + base, k, p.xi) <= 0;
}

struct D4Window {
    Rational beta_lo, beta_hi, m_lo, m_hi;
};

inline SparseSeries zd4(long k, const D4Window& w, const std::function<Rational(const ChernData&)>& j_provider, const GeometryParams& g) {
    const Rational c = Rational(k) * g.H3();
    SparseSeries out(Box::of(-w.m_hi, -w.m_lo, -w.beta_hi, -w.beta_lo, 0, 0));
    for (Rational b = lattice_ceil(w.beta_lo, g.beta_den, true); b <= w.beta_hi; b += Rational(1, g.beta_den))
        for (Rational m = lattice_ceil(w.m_lo, g.m_den, true); m <= w.m_hi; m += Rational(1, g.m_den)) {
            const ChernData v(0, c, b, m);
            if (!is_integral_class(v, g)) continue;
            out.add_term(Monomial{-m, -b, Rational(0)}, j_provider(v));
        }
    return out;
}

// The compared region is a union of per-d1 bands: y spans the curve degrees of C(k, eps),
// x runs x_span steps above the lowest monomial the d1 summand can produce.
struct OsvWindow {
    long d1_lo = -2, d1_hi = 2;
    long x_span = 4;
};

struct OsvBand {
    long d1 = 0;
    Rational x_lo, x_hi, y_lo, y_hi;
    bool contains(const Monomial& m) const { return m.xe >= x_lo && m.xe <= x_hi && m.ye >= y_lo && m.ye <= y_hi; }
};

namespace detail {

inline Box unbounded_box() {
    const Rational big(Integer(1) << 62);
    return Box::of(-big, big, -big, big, -big, big);
}

struct RegionEntry {
    Rational m, deg, value;
};

inline long max_region_degree(const OsvRegion& region) {
    long d = -1;
    while (region.beta_ok(Rational(d + 1))) ++d;
    return d;
}

// Smallest table index m at degree deg with (deg, -m) in C and m >= -castelnuovo(deg); nullopt if none.
inline std::optional<Rational> region_m_min(const OsvRegion& region, long deg, const GeometryParams& g) {
    Rational m(ceil_q(-castelnuovo_bound(Rational(deg), g)));
    const Rational K(region.k);
    // one-sided: m > -eps k^3 >= -delta k^3, so this many steps always suffice
    const Rational limit = m + region.delta * K * K * K + 2;
    while (!region.m_ok(-m)) {
        m += 1;
        if (m > limit) return std::nullopt;
    }
    return m;
}

inline Rational z_exponent0(long k, const GeometryParams& g) {
    const Rational K(k);
    return K * K * K * g.H3() / 6 + K * Rational(g.c2h) / 12;
}

struct D1Layout {
    long d1 = 0;
    Rational pre_x, pre_y;
    std::vector<std::optional<Rational>> p_min, i_min;  // by degree
    std::optional<Rational> p_off, i_off;  // min over degrees of -d1*deg + p_min, d2*deg + i_min
};

inline D1Layout layout(long k, long d1, const OsvRegion& region, const GeometryParams& g) {
    D1Layout L;
    L.d1 = d1;
    const Rational H3 = g.H3(), D1(d1), D2(d1 + k);
    L.pre_x = (D1 * D1 * D1 - D2 * D2 * D2) * H3 / 6;
    L.pre_y = (D1 * D1 - D2 * D2) * H3 / 2;
    const long dmax = max_region_degree(region);
    for (long deg = 0; deg <= dmax; ++deg) {
        L.p_min.push_back(region_m_min(region, deg, g));
        L.i_min.push_back(region_m_min(region, deg, g));
        if (L.p_min.back()) {
            const Rational off = -D1 * deg + *L.p_min.back();
            if (!L.p_off || off < *L.p_off) L.p_off = off;
        }
        if (L.i_min.back()) {
            const Rational off = D2 * deg + *L.i_min.back();
            if (!L.i_off || off < *L.i_off) L.i_off = off;
        }
    }
    return L;
}

inline std::optional<OsvBand> band_for(long k, long d1, const OsvRegion& region, const GeometryParams& g, long x_span) {
    const D1Layout L = layout(k, d1, region, g);
    if (!L.p_off || !L.i_off) return std::nullopt;
    const Rational dmax(max_region_degree(region));
    OsvBand b;
    b.d1 = d1;
    b.x_lo = L.pre_x + *L.p_off + *L.i_off;
    b.x_hi = b.x_lo + x_span;
    b.y_lo = L.pre_y - dmax;
    b.y_hi = L.pre_y + dmax;
    return b;
}

struct D1Entries {
    D1Layout layout;
    std::vector<RegionEntry> pts, ids;
};

// Entries of the d1 summand that can reach x <= x_hi.
inline D1Entries entries_for(long k, long d1, const Rational& x_hi, const OsvRegion& region, const TableView& view,
                             const GeometryParams& g) {
    D1Entries out;
    out.layout = layout(k, d1, region, g);
    const D1Layout& L = out.layout;
    if (!L.p_off || !L.i_off) return out;
    const Rational D1(d1), D2(d1 + k);
    for (long deg = 0; deg < static_cast<long>(L.p_min.size()); ++deg) {
        if (L.p_min[deg]) {
            const Rational cap = x_hi - L.pre_x - *L.i_off + D1 * deg;
            for (Rational m = *L.p_min[deg]; m <= cap && region.m_ok(-m); m += 1) {
                const Rational v = view.pt(m, Rational(deg));
                if (v != 0) out.pts.push_back({m, Rational(deg), v});
            }
        }
        if (L.i_min[deg]) {
            const Rational cap = x_hi - L.pre_x - *L.p_off - D2 * deg;
            for (Rational m = *L.i_min[deg]; m <= cap && region.m_ok(-m); m += 1) {
                const Rational v = view.dt1(m, Rational(deg));
                if (v != 0) out.ids.push_back({m, Rational(deg), v});
            }
        }
    }
    return out;
}

inline SparseSeries d6_summand(long k, const D1Entries& e, const GeometryParams& g) {
    const Box big = unbounded_box();
    const Rational K(k), D1(e.layout.d1), D2(e.layout.d1 + k);
    SparseSeries P(big), I(big);
    for (const auto& t : e.pts) P.add_term(Monomial{t.m, t.deg, Rational(0)}, t.value);
    for (const auto& t : e.ids) I.add_term(Monomial{t.m, t.deg, Rational(0)}, t.value);
    SubstitutionRules ri, rp;
    ri.x = Monomial{Rational(1), Rational(0), Rational(-1)};
    ri.y = Monomial{D2, Rational(1), -K};
    rp.x = Monomial{Rational(1), Rational(0), Rational(-1)};
    rp.y = Monomial{-D1, Rational(-1), -K};
    const Monomial pre{e.layout.pre_x, e.layout.pre_y, z_exponent0(k, g)};
    return mul(SparseSeries::monomial(big, pre, 1), mul(substitute(I, ri, big), substitute(P, rp, big)));
}

inline bool in_bands(const std::vector<OsvBand>& bands, const Monomial& m) {
    for (const auto& b : bands)
        if (b.contains(m)) return true;
    return false;
}

inline SparseSeries keep_in_bands(const SparseSeries& s, const std::vector<OsvBand>& bands) {
    SparseSeries out(s.box());
    for (const auto& [m, c] : s.terms())
        if (in_bands(bands, m)) out.add_term(m, c);
    return out;
}

}  // namespace detail

inline std::vector<OsvBand> osv_bands(long k, const OsvRegion& region, const GeometryParams& g, const OsvWindow& w) {
    if (w.d1_lo > w.d1_hi) fail(ErrorKind::InvalidArgument, "empty d1 window");
    if (w.x_span < 0) fail(ErrorKind::InvalidArgument, "x_span must be >= 0");
    std::vector<OsvBand> bands;
    for (long d1 = w.d1_lo; d1 <= w.d1_hi; ++d1)
        if (auto b = detail::band_for(k, d1, region, g, w.x_span)) bands.push_back(*b);
    return bands;
}

// Summands of Z_D6 restricted to the bands; errors if a d1 outside the window reaches a band.
inline SparseSeries zd6(long k, const OsvRegion& region, const TableSet& tables, const GeometryParams& g, const OsvWindow& w) {
    const auto bands = osv_bands(k, region, g, w);
    TableView view(tables, g.tors);
    SparseSeries total(detail::unbounded_box());
    for (const auto& b : bands)
        total = add(total, detail::keep_in_bands(detail::d6_summand(k, detail::entries_for(k, b.d1, b.x_hi, region, view, g), g), {b}));
    view.throw_if_missing();
    Rational x_top;
    for (std::size_t i = 0; i < bands.size(); ++i)
        if (i == 0 || bands[i].x_hi > x_top) x_top = bands[i].x_hi;
    for (long d1 : {w.d1_lo - 1, w.d1_hi + 1}) {
        auto edge_band = detail::band_for(k, d1, region, g, 0);
        if (!edge_band || bands.empty()) continue;
        bool overlaps = false;
        for (const auto& b : bands) overlaps = overlaps || (edge_band->y_lo <= b.y_hi && b.y_lo <= edge_band->y_hi);
        if (!overlaps || edge_band->x_lo > x_top) continue;
        TableView edge_view(tables, g.tors);
        const auto edge = detail::keep_in_bands(detail::d6_summand(k, detail::entries_for(k, d1, x_top, region, edge_view, g), g), bands);
        edge_view.throw_if_missing();
        if (!edge.empty())
            fail(ErrorKind::WindowTooSmall, "d1 = " + std::to_string(d1) + " contributes inside the compared window");
    }
    return total;
}

inline SparseSeries osv_rhs(long k, const OsvRegion& region, const TableSet& tables, const GeometryParams& g, const OsvWindow& w) {
    return dz_at_minus1(zd6(k, region, tables, g, w)).scaled(Rational(g.tors * g.tors));
}

// Pair-by-pair sum over v1 = -e^{d1 H}(1,0,-b1,-m1), v2 = e^{d2 H}(1,0,-b2,-m2) placed at x^{-m} y^{-beta}.
inline SparseSeries osv_lhs(long k, const OsvRegion& region, const TableSet& tables, const GeometryParams& g, const OsvWindow& w) {
    const auto bands = osv_bands(k, region, g, w);
    TableView view(tables, g.tors);
    Box flat = detail::unbounded_box();
    flat.lo[2] = flat.hi[2] = 0;
    SparseSeries total(flat);
    const Rational tors2(g.tors * g.tors);
    for (const auto& b : bands) {
        const auto e = detail::entries_for(k, b.d1, b.x_hi, region, view, g);
        for (const auto& p : e.pts)
            for (const auto& i : e.ids) {
                // P index is -m1
                const ChernData v1 = negate(twist(ChernData(1, 0, -p.deg, p.m), Rational(b.d1), g));
                const ChernData v2 = twist(ChernData(1, 0, -i.deg, -i.m), Rational(b.d1 + k), g);
                const ChernData v = v1 + v2;
                const Monomial mono{-v.d, -v.s, Rational(0)};
                if (!b.contains(mono)) continue;
                const Rational chi = euler_pairing(v2, v1, g);
                total.add_term(mono, tors2 * sign_pow(chi - 1) * chi * i.value * p.value);
            }
    }
    view.throw_if_missing();
    return total;
}

struct OsvRow {
    Monomial mono;
    Rational lhs, rhs;
    bool excluded = false;
};

struct OsvComparison {
    std::vector<OsvRow> rows;
    long mismatches = 0;           // outside the excluded region
    long excluded_mismatches = 0;  // inside it, tolerated
};

inline OsvComparison compare_osv(long k, const OsvParams& p, const SparseSeries& lhs, const SparseSeries& rhs, const GeometryParams& g) {
    std::set<Monomial> keys;
    for (const auto& [m, c] : lhs.terms()) keys.insert(m);
    for (const auto& [m, c] : rhs.terms()) keys.insert(m);
    OsvComparison out;
    for (const auto& m : keys) {
        OsvRow r{m, lhs.coefficient(m), rhs.coefficient(m), region_excluded(k, p, m.xe, m.ye, g)};
        if (r.lhs != r.rhs) ++(r.excluded ? out.excluded_mismatches : out.mismatches);
        out.rows.push_back(r);
    }
    return out;
}

}  // namespace wallcross
