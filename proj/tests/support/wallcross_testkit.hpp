#pragma once

// Random instance generators and independent oracles shared by the unit tests, the acceptance binary and `wallcross selftest`.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "wallcross/wallcross.hpp"

namespace wallcross::testkit {

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    long uniform(long lo, long hi) { return lo + static_cast<long>(engine() % static_cast<std::uint64_t>(hi - lo + 1)); }
    Rational rational(long num_bound, long den_bound) {
        return make_q(uniform(-num_bound, num_bound), uniform(1, den_bound));
    }
    ChernData chern(long bound, long den) {
        return ChernData(Rational(uniform(-3, 3)), rational(bound, den), rational(bound, den), rational(bound, den));
    }
    Rational nonzero_j() {
        long num = 0;
        while (num == 0) num = uniform(-6, 6);
        return make_q(num, uniform(1, 3));
    }
};

// Smallest m >= m_from on the m-lattice making (0, c, beta, m) integral, if any residue works.
inline std::optional<Rational> integral_m_from(const Rational& c, const Rational& beta, const Rational& m_from, const GeometryParams& g) {
    Rational m = lattice_ceil(m_from, g.m_den, true);
    for (long i = 0; i < g.m_den; ++i, m += make_q(1, g.m_den))
        if (is_integral_class(ChernData(0, c, beta, m), g)) return m;
    return std::nullopt;
}

// Rank-0 class with ch1 = kH, given beta, Q >= 0, m at most `drop` integer steps below the Q = 0 ceiling.
inline std::optional<ChernData> rank0_with_q_nonneg(long k, const Rational& beta, long drop, const GeometryParams& g) {
    const Rational c = Rational(k) * g.H3();
    const Rational m_hi = c * Rational(k * k) / 24 + beta * beta / (2 * c);
    auto m0 = integral_m_from(c, beta, m_hi - 1, g);
    if (!m0) return std::nullopt;
    Rational m = *m0;
    while (m + 1 <= m_hi) m += 1;
    while (m > m_hi) m -= 1;
    m -= Rational(drop);
    return ChernData(0, c, beta, m);
}

inline Rational quadratic_bmt(const ChernData& v, const Rational& b, const Rational& w, const GeometryParams& g) {
    const ChernData t = twist(v, -b, g);
    const Rational C0 = t.r * g.H3(), C1 = t.c, C2 = t.s, C3 = t.d;
    const Rational delta = C1 * C1 - 2 * C0 * C2;
    return ((2 * w - b * b) * delta + 4 * C2 * C2 - 6 * C1 * C3) / 2;
}

// chi(O_S(a)) for a hyperplane section S via Riemann-Roch on S: chi(O_S) + aH.(aH - K_S)/2 with K_S = H|_S.
inline Rational surface_chi(long a, const GeometryParams& g) {
    const Rational chi_os = make_q(g.h3, 6) + make_q(g.c2h, 12);  // chi(O_X) - chi(O_X(-1)) with chi(O_X) = 0
    return chi_os + Rational(a * (a - 1)) * Rational(g.h3) / 2;
}

// ---------- q = 3 Joyce-Song coefficient written out from the definition ----------

namespace js3 {

struct Slopes {
    Rational b, w_plus, w_minus;
    GeometryParams g;

    // nu_{b,w}; rank-0 classes ignore (b,w); an infinite slope is flagged by `inf`.
    std::pair<bool, Rational> nu(const ChernData& v, const Rational& w) const {
        const Rational den = v.c - b * v.r * g.H3();
        if (den == 0) return {true, Rational(0)};
        return {false, (v.s - w * v.r * g.H3()) / den};
    }
    int cmp(const ChernData& a, const ChernData& c, bool plus) const {
        const Rational& w = plus ? w_plus : w_minus;
        auto x = nu(a, w), y = nu(c, w);
        if (x.first || y.first) return x.first == y.first ? 0 : (x.first ? 1 : -1);
        return x.second == y.second ? 0 : (x.second < y.second ? -1 : 1);
    }
};

inline ChernData total(const std::vector<ChernData>& xs) {
    ChernData t(0, 0, 0, 0);
    for (const auto& x : xs) t = t + x;
    return t;
}

inline int S(const std::vector<ChernData>& a, const Slopes& sl) {
    int r = 0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        const ChernData left = total({a.begin(), a.begin() + static_cast<long>(i) + 1});
        const ChernData right = total({a.begin() + static_cast<long>(i) + 1, a.end()});
        const int c1 = sl.cmp(a[i], a[i + 1], true);
        const int c2 = sl.cmp(left, right, false);
        if (c1 <= 0 && c2 > 0) ++r;
        else if (!(c1 > 0 && c2 <= 0)) return 0;
    }
    return r % 2 ? -1 : 1;
}

// Compositions of 3 and of each t <= 3, listed by hand.
inline const std::vector<std::vector<int>>& compositions(int n) {
    static const std::vector<std::vector<int>> c1{{1}};
    static const std::vector<std::vector<int>> c2{{2}, {1, 1}};
    static const std::vector<std::vector<int>> c3{{3}, {1, 2}, {2, 1}, {1, 1, 1}};
    return n == 1 ? c1 : (n == 2 ? c2 : c3);
}

inline Rational U(const std::vector<ChernData>& a, const Slopes& sl) {
    const ChernData all = total(a);
    Rational u(0);
    for (const auto& parts : compositions(3)) {
        std::vector<ChernData> blocks;
        Rational weight(1);
        bool ok = true;
        std::size_t pos = 0;
        for (int len : parts) {
            std::vector<ChernData> members(a.begin() + static_cast<long>(pos), a.begin() + static_cast<long>(pos) + len);
            const ChernData B = total(members);
            for (const auto& m : members) ok = ok && sl.cmp(B, m, true) == 0;
            blocks.push_back(B);
            weight /= Rational(factorial(len));
            pos += static_cast<std::size_t>(len);
        }
        if (!ok) continue;
        const int t = static_cast<int>(blocks.size());
        for (const auto& groups : compositions(t)) {
            const long p = static_cast<long>(groups.size());
            Rational term = weight * Rational(p % 2 ? 1 : -1) / Rational(p);
            std::size_t q = 0;
            for (int len : groups) {
                std::vector<ChernData> g(blocks.begin() + static_cast<long>(q), blocks.begin() + static_cast<long>(q) + len);
                if (p > 1 && sl.cmp(total(g), all, false) != 0) term = 0;
                term *= S(g, sl);
                q += static_cast<std::size_t>(len);
            }
            u += term;
        }
    }
    return u;
}

// Sum over the distinct orderings of {a, b, c} of the full q = 3 coefficient.
inline Rational coefficient(const ChernData& a, const ChernData& b, const ChernData& c, const Slopes& sl) {
    std::vector<ChernData> order{a, b, c};
    std::sort(order.begin(), order.end());
    Rational sum(0);
    do {
        const Rational x12 = euler_pairing(order[0], order[1], sl.g), x13 = euler_pairing(order[0], order[2], sl.g),
                       x23 = euler_pairing(order[1], order[2], sl.g);
        const Rational trees = x12 * x13 + x12 * x23 + x13 * x23;
        const Rational u = U(order, sl);
        if (u == 0 || trees == 0) continue;
        const Rational e = 2 + x12 + x13 + x23;
        sum += Rational(sign_pow(e)) * u * trees / 4;
    } while (std::next_permutation(order.begin(), order.end()));
    return sum;
}

// The wall point used by c_pair_coeff, with w+- at a small fixed offset.
inline Slopes js_slopes(const ChernData& v1, long n, const GeometryParams& g) {
    const ChernData o = negate(line_bundle(Rational(-n), g));
    const PointBW po = pi(o, g), p1 = pi(v1, g);
    const Rational grad = (p1.w - po.w) / (p1.b - po.b);
    const Rational w0 = po.w + grad * (grad - po.b);
    const Rational eps(1, 1000000);
    return Slopes{grad, w0 + eps, w0 - eps, g};
}

}  // namespace js3

// ---------- slope-grouped product oracle for A / A-tilde coefficients ----------

struct ProductOracleInput {
    DecompositionProblem pb;  // only the data fields are read, never the engine
    TableKind head_table = TableKind::PT;
    std::function<ChernData(long kappa, const Rational& m, const Rational& deg)> invert;
    std::map<ChernData, Rational> j;
};

inline Rational product_oracle(const ProductOracleInput& in, const TableSet& tables, const GeometryParams& g) {
    const DecompositionProblem& pb = in.pb;
    const Rational H3 = g.H3();
    const long kappa_t = to_long(Rational(pb.target.c / H3).get_num());
    const long budget = kappa_t - pb.kappa_lo;
    const Rational big(Integer(1) << 40);
    const Box box = Box::of(Rational(0), Rational(budget), -big, big, -big, big);
    const Box head_box = Box::of(-big, big, -big, big, -big, big);

    // parts grouped by slope, in peel-off order
    std::map<Rational, std::vector<std::pair<ChernData, Rational>>> groups;
    for (const auto& [cls, val] : in.j) {
        const Rational k = cls.c / H3;
        if (cls.r != 0 || k <= 0 || k > pb.part_k_max || val == 0) continue;
        const Rational slope = cls.s / cls.c;
        const bool on = slope == pb.filter.mu;
        const bool side = pb.filter.keep_above ? slope > pb.filter.mu : slope < pb.filter.mu;
        if (!(side || (on && pb.filter.inclusive))) continue;
        groups[slope].push_back({cls, val});
    }
    std::vector<Rational> order;
    for (const auto& [s, _] : groups) order.push_back(s);
    if (!pb.chi_ascending) std::reverse(order.begin(), order.end());

    SparseSeries acc = SparseSeries::one(box);
    for (const auto& s : order) {
        SparseSeries next(box);
        for (const auto& [mono, coeff] : acc.terms()) {
            const ChernData rest = pb.target - ChernData(0, mono.xe * H3, mono.ye, mono.ze);
            SparseSeries gen(box);
            for (const auto& [cls, val] : groups[s]) {
                const Rational chi = euler_pairing(cls, rest, g);
                gen.add_term(Monomial{cls.c / H3, cls.s, cls.d}, Rational(sign_pow(chi)) * chi * val);
            }
            next = add(next, mul(SparseSeries::monomial(box, mono, coeff), exp_series(gen)));
        }
        acc = next;
    }

    // head series straight from the table entries; x carries ch1/H^3 of every class
    SparseSeries heads(head_box);
    const InvariantTable& t = tables.of(in.head_table);
    for (long kappa = pb.kappa_lo; kappa <= pb.kappa_hi; ++kappa)
        for (const auto& [key, val] : t.entries()) {
            const ChernData h = in.invert(kappa, key.m, Rational(key.deg));
            if (delta_H(h, g) < 0 || !pb.governing.point_above_or_on(pi(h, g))) continue;
            heads.add_term(Monomial{Rational(kappa), h.s, h.d}, val * Rational(g.tors));
        }
    const SparseSeries prod = mul(acc.restricted(head_box), heads);
    return prod.coefficient(Monomial{pb.target.c / H3, pb.target.s, pb.target.d});
}

// ---------- instance generators ----------

struct InductiveInstance {
    ChernData v;
    long n = 1;
    InductiveContext ctx;
    ChernData target;
    Rational mu;
    std::map<ChernData, Rational> j;
    TableSet tables;
};

// Multisets of parts (with multiplicity) whose ch1 sum fits the budget.
inline void for_each_multiset(const std::vector<ChernData>& parts, long budget, const GeometryParams& g,
                              const std::function<void(const ChernData&)>& visit) {
    std::function<void(std::size_t, long, const ChernData&)> rec = [&](std::size_t i, long used, const ChernData& sum) {
        if (i == parts.size()) {
            visit(sum);
            return;
        }
        const long k = to_long(Rational(parts[i].c / g.H3()).get_num());
        ChernData acc = sum;
        rec(i + 1, used, acc);
        for (long q = 1; used + q * k <= budget; ++q) {
            acc = acc + parts[i];
            rec(i + 1, used + q * k, acc);
        }
    };
    rec(0, 0, ChernData(0, 0, 0, 0));
}

// Windows covering every head key in `keys`, starting at the Castelnuovo floor of each degree.
inline std::vector<TableWindow> windows_for(const std::set<std::pair<long, Rational>>& keys, const GeometryParams& g) {
    std::map<long, Rational> top;
    for (const auto& [deg, m] : keys) {
        auto it = top.find(deg);
        if (it == top.end() || m > it->second) top[deg] = m;
    }
    std::vector<TableWindow> out;
    for (const auto& [deg, m] : top) out.push_back({deg, deg, Rational(ceil_q(-castelnuovo_bound(Rational(deg), g))), m + 1});
    return out;
}

inline InductiveInstance inductive_instance(std::uint64_t seed, const GeometryParams& g) {
    Rng rng(seed);
    const Rational H3 = g.H3();
    for (;;) {
        InductiveInstance inst;
        const long k = rng.uniform(2, 3);
        const Rational beta = make_q(rng.uniform(-2 * k, 2 * k), 2);
        auto v = rank0_with_q_nonneg(k, beta, rng.uniform(0, 2), g);
        if (!v) continue;
        inst.v = *v;
        InductiveOptions opt;
        inst.n = 0;
        for (long n = 1; n <= 12 && !inst.n; ++n)
            if (validate_n(inst.v, n, g, opt).ok()) inst.n = n;
        if (!inst.n) continue;
        inst.ctx = InductiveContext{inst.v, inst.n, KappaWindow::Adopted};
        inst.target = make_vn(inst.v, inst.n, g);
        inst.mu = bmt_line(inst.target, g).g;

        std::vector<ChernData> admissible;
        for (long kp = 1; kp < k; ++kp) {
            const Rational c = Rational(kp) * H3;
            const Rational b_lo = lattice_ceil(inst.mu * c, g.beta_den, true);
            for (int i = 0; i < 4; ++i) {
                const Rational b = b_lo + make_q(rng.uniform(0, 6), g.beta_den);
                if (auto cls = rank0_with_q_nonneg(kp, b, rng.uniform(0, 3), g)) inst.j[*cls] = rng.nonzero_j();
            }
            // one class below mu, which the filter must drop
            if (auto cls = rank0_with_q_nonneg(kp, b_lo - 1, 0, g)) inst.j[*cls] = rng.nonzero_j();
        }
        // a slope tie across different ch1
        if (!inst.j.empty() && k == 3) {
            const ChernData a = inst.j.begin()->first;
            if (a.c == H3)
                if (auto cls = rank0_with_q_nonneg(2, 2 * a.s, 0, g)) inst.j[*cls] = rng.nonzero_j();
        }
        for (const auto& [cls, val] : inst.j)
            if (cls.s / cls.c >= inst.mu) admissible.push_back(cls);

        const auto [klo, khi] = kappa_window(k, inst.n, KappaWindow::Adopted);
        const long kappa_t = to_long(Rational(inst.target.c / H3).get_num());
        const LineBW lf = bmt_line(inst.target, g);
        std::set<std::pair<long, Rational>> keys;
        for_each_multiset(admissible, kappa_t - klo, g, [&](const ChernData& sum) {
            const ChernData h = inst.target - sum;
            const Rational kap = h.c / H3;
            if (kap < klo || kap > khi || delta_H(h, g) < 0 || !lf.point_above_or_on(pi(h, g))) return;
            const HeadLookup lk = pt_conversion(h, g);
            if (lk.deg < 0 || !is_integer(lk.deg) || lk.m < -castelnuovo_bound(lk.deg, g)) return;
            keys.insert({to_long(lk.deg.get_num()), lk.m});
        });
        if (keys.empty()) continue;
        inst.tables.pt = synthetic_table(seed * 7919 + 1, TableKind::PT, windows_for(keys, g), 3);
        return inst;
    }
}

inline ProductOracleInput oracle_input(const InductiveInstance& inst, const GeometryParams& g) {
    ProductOracleInput in;
    in.pb = inductive_problem(inst.ctx, inst.target, inst.mu, false, g);
    in.head_table = TableKind::PT;
    in.invert = [g](long kappa, const Rational& m, const Rational& deg) { return pt_class(kappa, m, deg, g); };
    in.j = inst.j;
    return in;
}

inline RankZeroProvider map_provider(const std::map<ChernData, Rational>& j) {
    return [&j](const ChernData& a) {
        auto it = j.find(a);
        return it == j.end() ? Rational(0) : it->second;
    };
}

struct TildeInstance {
    ChernData w, wn;
    long n = 1;
    Rational mu;
    std::map<ChernData, Rational> j;
    TableSet tables;
};

// Odd-case A-tilde: w = (2, H, beta, m), parts below l_f(w_n), DT1 heads.
inline TildeInstance tilde_instance(std::uint64_t seed, const GeometryParams& g) {
    Rng rng(seed);
    const Rational H3 = g.H3();
    for (;;) {
        TildeInstance inst;
        // integral odd rank-2 class as a sum of two rank-1 classes
        inst.w = dt1_class(0, Rational(rng.uniform(-2, 2)), Rational(rng.uniform(0, 2)), g) +
                 dt1_class(1, Rational(rng.uniform(-2, 2)), Rational(rng.uniform(0, 4)), g);
        const Rank2Reduction red = reduce_rank2(inst.w, g);
        inst.n = 0;
        for (long n = 1; n <= 3 && !inst.n; ++n)
            if (validate_rank2_n(red, n, g).ok()) inst.n = n;
        if (!inst.n) continue;
        inst.wn = inst.w - line_bundle(Rational(-inst.n), g);
        inst.mu = bmt_line(inst.wn, g).g;
        for (long kp = 1; kp <= std::min(2L, inst.n); ++kp) {
            const Rational c = Rational(kp) * H3;
            const Rational b_hi = lattice_floor(inst.mu * c, g.beta_den, true);
            for (int i = 0; i < 3; ++i)
                if (auto cls = rank0_with_q_nonneg(kp, b_hi - make_q(rng.uniform(0, 4), g.beta_den), rng.uniform(0, 2), g))
                    inst.j[*cls] = rng.nonzero_j();
        }
        if (!inst.j.empty() && inst.n >= 2) {
            const ChernData a = inst.j.begin()->first;
            if (a.c == H3)
                if (auto cls = rank0_with_q_nonneg(2, 2 * a.s, 0, g)) inst.j[*cls] = rng.nonzero_j();
        }
        std::vector<ChernData> admissible;
        for (const auto& [cls, val] : inst.j)
            if (cls.s / cls.c <= inst.mu) admissible.push_back(cls);
        const LineBW lf = bmt_line(inst.wn, g);
        const long kappa_t = to_long(Rational(inst.wn.c / H3).get_num());
        std::set<std::pair<long, Rational>> keys;
        for_each_multiset(admissible, kappa_t - 1, g, [&](const ChernData& sum) {
            const ChernData h = inst.wn - sum;
            const Rational kap = h.c / H3;
            if (kap < 1 || kap > inst.n || delta_H(h, g) < 0 || !lf.point_above_or_on(pi(h, g))) return;
            const HeadLookup lk = dt1_conversion(h, g);
            if (lk.deg < 0 || !is_integer(lk.deg) || lk.m < -castelnuovo_bound(lk.deg, g)) return;
            keys.insert({to_long(lk.deg.get_num()), lk.m});
        });
        if (keys.empty()) continue;
        inst.tables.dt1 = synthetic_table(seed * 104729 + 3, TableKind::DT1, windows_for(keys, g), 3);
        return inst;
    }
}

inline ProductOracleInput oracle_input(const TildeInstance& inst, const GeometryParams& g) {
    ProductOracleInput in;
    in.pb = a_tilde_problem(ATildeContext{inst.wn, inst.n, true}, inst.wn, inst.mu, true, g);
    in.head_table = TableKind::DT1;
    in.invert = [g](long kappa, const Rational& m, const Rational& deg) { return dt1_class(kappa, m, deg, g); };
    in.j = inst.j;
    return in;
}

// Shuffles equal-slope parts, restores the canonical order with order_parts and re-evaluates each term.
inline bool shuffle_invariant(const std::vector<Decomposition>& ds, const ChernData& target, bool ascending, long rounds,
                              std::uint64_t seed, const GeometryParams& g, long* checked = nullptr) {
    std::mt19937_64 rng(seed);
    for (const auto& d : ds) {
        if (d.parts.size() < 2) continue;
        for (long r = 0; r < rounds; ++r) {
            std::vector<WeightedPart> parts = d.parts;
            std::shuffle(parts.begin(), parts.end(), rng);
            order_parts(parts, ascending);
            if (decomposition_term(target, d.head_value, parts, g) != d.term) return false;
        }
        if (checked) ++*checked;
    }
    return true;
}

// Method I instance with integral tables covering every lookup.
struct DirectInstance {
    ChernData v;
    TableSet tables;
};

// Admissible classes sit near twists of O_{kS}; beta is drawn around k*a*H^3 - k^2 H^3/2 and m at the top of its lattice.
inline std::optional<DirectInstance> direct_instance(std::uint64_t seed, const GeometryParams& g) {
    Rng rng(seed);
    const long k = rng.uniform(1, 5), a = rng.uniform(-2, 2);
    const Rational H3 = g.H3();
    const Rational beta = Rational(k * a) * H3 - Rational(k * k) * H3 / 2 + make_q(rng.uniform(-4, 4), g.beta_den);
    auto v = rank0_with_q_nonneg(k, beta, rng.uniform(0, 1), g);
    if (!v || !bound_ok(*v, g)) return std::nullopt;
    DirectInstance inst{*v, {}};
    std::set<std::pair<long, Rational>> pkeys, ikeys;
    for (const auto& sp : enumerate_splittings(*v, g).splittings) {
        pkeys.insert({to_long(sp.beta1.get_num()), -sp.m1});
        ikeys.insert({to_long(sp.beta2.get_num()), sp.m2});
    }
    if (pkeys.empty()) return std::nullopt;
    inst.tables.pt = synthetic_table(seed * 31 + 1, TableKind::PT, windows_for(pkeys, g), 1);
    inst.tables.dt1 = synthetic_table(seed * 37 + 2, TableKind::DT1, windows_for(ikeys, g), 1);
    return inst;
}

inline TableSet minimal_tables(long m_hi = 0) {
    TableSet t;
    t.pt.add_window({0, 0, Rational(0), Rational(m_hi)});
    t.dt1.add_window({0, 0, Rational(0), Rational(m_hi)});
    t.pt.insert(Rational(0), 0, Rational(1));
    t.dt1.insert(Rational(0), 0, Rational(1));
    return t;
}

// OSV tables: every degree of C(k, eps), m from the Castelnuovo floor up to m_hi.
inline TableSet osv_tables(std::uint64_t seed, const OsvRegion& region, long m_hi, const GeometryParams& g) {
    std::vector<TableWindow> ws;
    for (long deg = 0; region.beta_ok(Rational(deg)); ++deg)
        ws.push_back({deg, deg, Rational(ceil_q(-castelnuovo_bound(Rational(deg), g))), Rational(m_hi)});
    TableSet t;
    t.pt = synthetic_table(seed * 2 + 11, TableKind::PT, ws, 4);
    t.dt1 = synthetic_table(seed * 2 + 12, TableKind::DT1, ws, 4);
    return t;
}

}  // namespace wallcross::testkit
