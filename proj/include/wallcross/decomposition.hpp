#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wallcross/kgeom.hpp"
#include "wallcross/rank0_direct.hpp"
#include "wallcross/tables.hpp"

namespace wallcross {

using RankZeroProvider = std::function<Rational(const ChernData&)>;

// Admissible side of mu for the nu_H slope of a rank-0 factor.
struct SlopeFilter {
    Rational mu;
    bool keep_above = true;
    bool inclusive = true;

    bool admits(const Rational& slope) const {
        if (slope == mu) return inclusive;
        return keep_above ? slope > mu : slope < mu;
    }
};

struct HeadLookup {
    TableKind kind = TableKind::PT;
    Rational m, deg;
};

// A rank +-1 target split as head + sum q_i * part_i with rank-0 parts.
struct DecompositionProblem {
    ChernData target;
    int head_rank = -1;
    LineBW governing;  // Pi(head) must lie above or on it
    long kappa_lo = 0, kappa_hi = -1;  // inclusive window on ch1.H^2/H^3 of the head
    long part_k_max = 0;
    SlopeFilter filter;
    bool chi_ascending = true;  // order in which parts are peeled off the target
    std::function<HeadLookup(const ChernData&)> convert;
};

struct WeightedPart {
    ChernData cls;
    Rational j;
    long q = 1;
};

struct Decomposition {
    ChernData head;
    HeadLookup lookup;
    Rational head_value;
    std::vector<WeightedPart> parts;  // processing order
    std::vector<Rational> chis;
    Rational term;
};

inline Rational part_slope(const ChernData& a) { return a.s / a.c; }

// Stable, so parts of equal slope keep their relative order.
inline void order_parts(std::vector<WeightedPart>& parts, bool ascending) {
    std::stable_sort(parts.begin(), parts.end(), [ascending](const WeightedPart& a, const WeightedPart& b) {
        const Rational sa = part_slope(a.cls), sb = part_slope(b.cls);
        return ascending ? sa < sb : sa > sb;
    });
}

// head_value * prod ((-1)^chi_i chi_i J_i)^q_i / q_i!, chi_i = chi(part_i, target - earlier parts).
inline Rational decomposition_term(const ChernData& target, const Rational& head_value, const std::vector<WeightedPart>& parts,
                                   const GeometryParams& g, std::vector<Rational>* chis_out = nullptr) {
    Rational term = head_value;
    ChernData rest = target;
    if (chis_out) chis_out->clear();
    for (const auto& p : parts) {
        const Rational chi = euler_pairing(p.cls, rest, g);
        if (chis_out) chis_out->push_back(chi);
        const Rational w = chi == 0 ? Rational(0) : Rational(sign_pow(chi) * chi * p.j);
        term *= pow_q(w, p.q) / Rational(factorial(p.q));
        rest = rest - Rational(p.q) * p.cls;
    }
    return term;
}

struct EnumerationStats {
    long candidates = 0;
    long nodes = 0;
    long heads_with_value = 0;
};

struct CoefficientResult {
    Rational value;
    std::vector<Decomposition> decompositions;
    EnumerationStats stats;
};

namespace detail {

struct HeadShapeBounds {
    bool any = false;
    Rational s_lo, s_hi;  // range of the parts' ch2.H sum
    Rational m_need;      // smallest parts' ch3 sum any head can accept
};

// beta range of a head with ch1 = kappa H: Delta >= 0 and Pi above or on the governing line.
inline bool head_beta_range(const DecompositionProblem& pb, long kappa, const GeometryParams& g, Rational& lo, Rational& hi) {
    const Rational H3 = g.H3(), K(kappa);
    if (pb.head_rank < 0) {
        lo = -K * K * H3 / 2;
        hi = H3 * (pb.governing.g * K - pb.governing.c0);
    } else {
        lo = H3 * (pb.governing.g * K + pb.governing.c0);
        hi = K * K * H3 / 2;
    }
    return lo <= hi;
}

}  // namespace detail

class DecompositionEngine {
public:
    DecompositionEngine(const DecompositionProblem& pb, const TableSet& tables, const RankZeroProvider& j, const GeometryParams& g)
        : pb_(pb), view_(tables, g.tors), j_(j), g_(g) {}

    CoefficientResult run(bool keep_terms) {
        keep_terms_ = keep_terms;
        validate();
        const Rational H3 = g_.H3();
        kappa_t_ = to_long(Rational(pb_.target.c / H3).get_num());
        const long k_hi = std::min(pb_.kappa_hi, kappa_t_);
        if (pb_.kappa_lo > k_hi) return finish();
        budget_ = kappa_t_ - pb_.kappa_lo;

        shapes_ = head_shapes(k_hi);
        if (!shapes_.any) return finish();
        build_candidates();
        std::vector<std::pair<std::size_t, long>> chosen;
        dfs(0, 0, ChernData(0, 0, 0, 0), chosen);
        return finish();
    }

private:
    void validate() const {
        if (pb_.head_rank != 1 && pb_.head_rank != -1) fail(ErrorKind::InvalidArgument, "head rank must be +1 or -1");
        if (pb_.target.r != pb_.head_rank) fail(ErrorKind::InvalidArgument, "target rank differs from head rank: " + pb_.target.str());
        if (!is_integer(pb_.target.c / g_.H3())) fail(ErrorKind::InvalidArgument, "target ch1 is not a multiple of H");
        if (!is_integer(pb_.target.s * g_.beta_den) || !is_integer(pb_.target.d * g_.m_den))
            fail(ErrorKind::InvalidArgument, "target is off the (beta, m) lattice: " + pb_.target.str());
        if (!pb_.convert) fail(ErrorKind::InvalidArgument, "decomposition problem has no head conversion");
    }

    detail::HeadShapeBounds head_shapes(long k_hi) const {
        detail::HeadShapeBounds out;
        const Rational H3 = g_.H3();
        bool have_range = false;
        for (long kappa = pb_.kappa_lo; kappa <= k_hi; ++kappa) {
            Rational lo, hi;
            if (!detail::head_beta_range(pb_, kappa, g_, lo, hi)) continue;
            const Rational s_lo = pb_.target.s - hi, s_hi = pb_.target.s - lo;
            if (!have_range || s_lo < out.s_lo) out.s_lo = s_lo;
            if (!have_range || s_hi > out.s_hi) out.s_hi = s_hi;
            have_range = true;
            // The converted (m, deg) are affine in beta, so need(beta) is concave and its minimum over the
            // lattice points with deg >= 0 sits at one of the two extreme such points.
            Rational first = lattice_ceil(lo, g_.beta_den, true), last = lattice_floor(hi, g_.beta_den, true);
            if (first > last) continue;
            const auto at = [&](const Rational& b) { return pb_.convert(ChernData(pb_.target.r, Rational(kappa) * H3, b, pb_.target.d)); };
            const Rational d_first = at(first).deg, d_last = at(last).deg;
            if (d_first < 0 && d_last < 0) continue;
            if (d_first < 0 || d_last < 0) {
                const Rational root = first - d_first * (last - first) / (d_last - d_first);
                if (d_first < 0) first = lattice_ceil(root, g_.beta_den, true);
                else last = lattice_floor(root, g_.beta_den, true);
                if (first > last) continue;
            }
            for (const Rational& b : {first, last}) {
                const HeadLookup at0 = at(b);
                const Rational need = -castelnuovo_bound(at0.deg, g_) - at0.m;
                if (!out.any || need < out.m_need) out.m_need = need;
                out.any = true;
            }
        }
        return out;
    }

    void build_candidates() {
        const Rational H3 = g_.H3();
        const Rational& mu = pb_.filter.mu;
        const long kmax = std::min(pb_.part_k_max, budget_);
        struct Shape {
            long k;
            Rational beta, m_hi;
        };
        std::vector<Shape> shapes;
        m_up_unit_ = 0;
        for (long k = 1; k <= kmax; ++k) {
            const Rational K(k), c = K * H3;
            const Rational others = mu * H3 * Rational(budget_ - k);
            Rational lo, hi;
            if (pb_.filter.keep_above) {
                lo = lattice_ceil(mu * c, g_.beta_den, true);
                hi = lattice_floor(shapes_.s_hi - std::min(Rational(0), others), g_.beta_den, true);
            } else {
                hi = lattice_floor(mu * c, g_.beta_den, true);
                lo = lattice_ceil(shapes_.s_lo - std::max(Rational(0), others), g_.beta_den, true);
            }
            for (Rational b = lo; b <= hi; b += Rational(1, g_.beta_den)) {
                if (!pb_.filter.admits(b / c)) continue;
                // Q >= 0, else the rank-0 invariant vanishes.
                const Rational m_hi = lattice_floor(c * K * K / 24 + b * b / (2 * c), g_.m_den, true);
                shapes.push_back({k, b, m_hi});
                if (m_hi > 0) m_up_unit_ = std::max(m_up_unit_, Rational(m_hi / K));
            }
        }
        for (const auto& sh : shapes) {
            const Rational c = Rational(sh.k) * H3;
            const Rational m_lo = lattice_ceil(shapes_.m_need - Rational(budget_ - sh.k) * m_up_unit_, g_.m_den, true);
            Rational m = m_lo;
            bool aligned = false;
            for (long i = 0; i < g_.m_den && m <= sh.m_hi; ++i, m += Rational(1, g_.m_den)) {
                if (is_integral_class(ChernData(0, c, sh.beta, m), g_)) {
                    aligned = true;
                    break;
                }
            }
            if (!aligned) continue;
            for (; m <= sh.m_hi; m += 1) {
                const ChernData cls(0, c, sh.beta, m);
                Rational j;
                try {
                    j = j_(cls);
                } catch (const IncompleteInputError& e) {
                    missing_.add(e);
                    continue;
                }
                if (j == 0) continue;
                cands_.push_back({cls, j, 1});
            }
        }
        const bool asc = pb_.chi_ascending;
        std::sort(cands_.begin(), cands_.end(), [asc](const WeightedPart& a, const WeightedPart& b) {
            const Rational sa = part_slope(a.cls), sb = part_slope(b.cls);
            if (sa != sb) return asc ? sa < sb : sa > sb;
            return a.cls < b.cls;
        });
        stats_.candidates = static_cast<long>(cands_.size());
    }

    bool beta_hopeless(const Rational& s_sum, long remaining) const {
        const Rational reach = pb_.filter.mu * g_.H3() * Rational(remaining);
        if (pb_.filter.keep_above) return s_sum + std::min(Rational(0), reach) > shapes_.s_hi;
        return s_sum + std::max(Rational(0), reach) < shapes_.s_lo;
    }

    void dfs(std::size_t start, long k_used, const ChernData& sum, std::vector<std::pair<std::size_t, long>>& chosen) {
        ++stats_.nodes;
        evaluate_head(k_used, sum, chosen);
        for (std::size_t i = start; i < cands_.size(); ++i) {
            const long k = to_long(Rational(cands_[i].cls.c / g_.H3()).get_num());
            ChernData acc = sum;
            for (long q = 1; k_used + q * k <= budget_; ++q) {
                acc = acc + cands_[i].cls;
                const long remaining = budget_ - k_used - q * k;
                if (beta_hopeless(acc.s, remaining)) continue;
                if (acc.d + Rational(remaining) * m_up_unit_ < shapes_.m_need) continue;
                chosen.emplace_back(i, q);
                dfs(i + 1, k_used + q * k, acc, chosen);
                chosen.pop_back();
            }
        }
    }

    void evaluate_head(long k_used, const ChernData& sum, const std::vector<std::pair<std::size_t, long>>& chosen) {
        const long kappa = kappa_t_ - k_used;
        if (kappa < pb_.kappa_lo || kappa > pb_.kappa_hi) return;
        const ChernData head = pb_.target - sum;
        if (delta_H(head, g_) < 0) return;
        if (!pb_.governing.point_above_or_on(pi(head, g_))) return;
        const HeadLookup lk = pb_.convert(head);
        if (lk.deg < 0 || !is_integer(lk.deg)) return;
        if (lk.m < -castelnuovo_bound(lk.deg, g_)) return;
        const Rational raw = lk.kind == TableKind::PT ? view_.pt(lk.m, lk.deg) : view_.dt1(lk.m, lk.deg);
        if (raw == 0) return;
        ++stats_.heads_with_value;

        Decomposition d;
        d.head = head;
        d.lookup = lk;
        d.head_value = raw * Rational(g_.tors);
        for (const auto& [idx, q] : chosen) d.parts.push_back({cands_[idx].cls, cands_[idx].j, q});
        d.term = decomposition_term(pb_.target, d.head_value, d.parts, g_, &d.chis);
        value_ += d.term;
        if (keep_terms_) decomps_.push_back(std::move(d));
    }

    CoefficientResult finish() {
        missing_.add_all(view_.missing());
        missing_.throw_if_any();
        CoefficientResult r;
        r.value = value_;
        r.decompositions = std::move(decomps_);
        r.stats = stats_;
        return r;
    }

    const DecompositionProblem& pb_;
    TableView view_;
    const RankZeroProvider& j_;
    GeometryParams g_;
    bool keep_terms_ = false;
    long kappa_t_ = 0, budget_ = 0;
    detail::HeadShapeBounds shapes_;
    Rational m_up_unit_;
    std::vector<WeightedPart> cands_;
    MissingKeys missing_;
    Rational value_;
    std::vector<Decomposition> decomps_;
    EnumerationStats stats_;
};

inline CoefficientResult decomposition_coefficient(const DecompositionProblem& pb, const TableSet& tables, const RankZeroProvider& j,
                                                   const GeometryParams& g, bool keep_terms = false) {
    return DecompositionEngine(pb, tables, j, g).run(keep_terms);
}

}  // namespace wallcross
