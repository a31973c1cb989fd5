#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wallcross/decomposition.hpp"
#include "wallcross/kgeom.hpp"
#include "wallcross/rank0_direct.hpp"
#include "wallcross/tables.hpp"

namespace wallcross {

// v - [O(-n)]
inline ChernData make_vn(const ChernData& v, long n, const GeometryParams& g) {
    return v - line_bundle(Rational(-n), g);
}

enum class KappaWindow {
    Adopted,  // n - k/3 < kappa <= n + k
    Printed,  // n + k < kappa <= n - k/3, empty for k > 0
};

struct InductiveOptions {
    bool strict = false;  // true: rank-0 factors need nu_H > mu rather than >=
    KappaWindow window = KappaWindow::Adopted;
    Rational width_slack = 0;  // validator needs b-width of l_f(v_n) cap U > k + n * slack
    long n_search = 10;        // sub-invariants may raise n this far to pass the validator
    bool keep_terms = false;
};

inline std::pair<long, long> kappa_window(long k, long n, KappaWindow mode) {
    const Rational lo_adopted = Rational(n) - make_q(k, 3);
    if (mode == KappaWindow::Adopted) return {to_long(floor_q(lo_adopted)) + 1, n + k};
    return {n + k + 1, to_long(floor_q(lo_adopted))};
}

inline LineBW lf_line_vn(const ChernData& vn, const GeometryParams& g) {
    if (delta_H(vn, g) == 0) fail(ErrorKind::DegenerateLfLine, "Delta_H(v_n) = 0 for " + vn.str());
    return bmt_line(vn, g);
}

inline bool in_Mvn(const ChernData& v, long n, const ChernData& a, const GeometryParams& g,
                   KappaWindow mode = KappaWindow::Adopted) {
    const ChernData vn = make_vn(v, n, g);
    const LineBW lf = lf_line_vn(vn, g);
    if (a.r != -1) return false;
    if (delta_H(a, g) < 0) return false;
    const Rational kappa = a.c / g.H3();
    if (!is_integer(kappa)) return false;
    const auto [lo, hi] = kappa_window(rank0_k(v, g), n, mode);
    const long kp = to_long(kappa.get_num());
    if (kp < lo || kp > hi) return false;
    return lf.point_above_or_on(pi(a, g));
}

// (-1, kappa H, beta, m) -> index of the PT invariant equal to its large-volume invariant.
inline HeadLookup pt_conversion(const ChernData& a, const GeometryParams& g) {
    const Rational H3 = g.H3();
    const Rational kappa = a.c / H3;
    HeadLookup out;
    out.kind = TableKind::PT;
    out.deg = a.s + kappa * kappa * H3 / 2;
    out.m = -a.d - kappa * a.s - kappa * kappa * kappa * H3 / 3;
    return out;
}

inline ChernData pt_class(long kappa, const Rational& m_pt, const Rational& deg_pt, const GeometryParams& g) {
    const Rational H3 = g.H3(), K(kappa);
    const Rational beta = deg_pt - K * K * H3 / 2;
    return ChernData(-1, K * H3, beta, -m_pt - K * beta - K * K * K * H3 / 3);
}

struct InductiveContext {
    ChernData v;
    long n = 1;
    KappaWindow window = KappaWindow::Adopted;
};

inline DecompositionProblem inductive_problem(const InductiveContext& ctx, const ChernData& target, const Rational& mu,
                                              bool strict, const GeometryParams& g) {
    const long k = rank0_k(ctx.v, g);
    DecompositionProblem pb;
    pb.target = target;
    pb.head_rank = -1;
    pb.governing = lf_line_vn(make_vn(ctx.v, ctx.n, g), g);
    std::tie(pb.kappa_lo, pb.kappa_hi) = kappa_window(k, ctx.n, ctx.window);
    pb.part_k_max = k - 1;
    pb.filter = SlopeFilter{mu, true, !strict};
    pb.chi_ascending = true;
    pb.convert = [g](const ChernData& h) { return pt_conversion(h, g); };
    return pb;
}

inline CoefficientResult a_coefficient(const InductiveContext& ctx, const ChernData& target, const Rational& mu, bool strict,
                                       const TableSet& tables, const RankZeroProvider& j_rank0, const GeometryParams& g,
                                       bool keep_terms = false) {
    return decomposition_coefficient(inductive_problem(ctx, target, mu, strict, g), tables, j_rank0, g, keep_terms);
}

struct NValidation {
    Rational chi;
    std::vector<std::pair<ErrorKind, std::string>> failures;
    bool ok() const { return failures.empty(); }
};

// Necessary conditions only; the paper leaves the sharp threshold for n to other work.
inline NValidation validate_n(const ChernData& v, long n, const GeometryParams& g, const InductiveOptions& opt) {
    NValidation out;
    const long k = rank0_k(v, g);
    if (n < 1) {
        out.failures.push_back({ErrorKind::NSufficiencyFailed, "n must be >= 1"});
        return out;
    }
    out.chi = euler_pairing(line_bundle(Rational(-n), g), v, g);
    if (out.chi == 0) out.failures.push_back({ErrorKind::ChiZero, "chi(O(-n), v) = 0 at n = " + std::to_string(n)});
    const auto [lo, hi] = kappa_window(k, n, opt.window);
    if (lo > hi) out.failures.push_back({ErrorKind::NSufficiencyFailed, "kappa window is empty"});
    const ChernData vn = make_vn(v, n, g);
    if (delta_H(vn, g) == 0) {
        out.failures.push_back({ErrorKind::DegenerateLfLine, "Delta_H(v_n) = 0"});
        return out;
    }
    const LineBW lf = bmt_line(vn, g);
    const Rational disc = lf.g * lf.g + 2 * lf.c0;  // (width/2)^2
    const Rational need = Rational(k) + Rational(n) * opt.width_slack;
    if (disc <= 0 || (need >= 0 && 4 * disc <= need * need))
        out.failures.push_back({ErrorKind::NSufficiencyFailed,
                                "l_f(v_n) meets the boundary of U with b-width not exceeding " + to_string(need)});
    return out;
}

inline void require_valid_n(const NValidation& nv) {
    if (nv.ok()) return;
    for (const auto& [kind, msg] : nv.failures)
        if (kind == ErrorKind::ChiZero || kind == ErrorKind::DegenerateLfLine) fail(kind, msg);
    fail(nv.failures.front().first, nv.failures.front().second);
}

struct Method2Result {
    Rational value;
    Rational chi, prefactor, mu, coefficient;
    long n = 0;
    std::vector<Decomposition> decompositions;
    EnumerationStats stats;
    std::vector<std::string> diagnostics;
};

inline Method2Result method2_with(const ChernData& v, long n, const TableSet& tables, const GeometryParams& g,
                                  const InductiveOptions& opt, const RankZeroProvider& j_rank0) {
    rank0_k(v, g);
    const NValidation nv = validate_n(v, n, g, opt);
    require_valid_n(nv);
    Method2Result res;
    res.n = n;
    res.chi = nv.chi;
    res.prefactor = Rational(sign_pow(nv.chi + 1)) / nv.chi;
    const ChernData vn = make_vn(v, n, g);
    res.mu = bmt_line(vn, g).g;
    CoefficientResult cr = a_coefficient(InductiveContext{v, n, opt.window}, vn, res.mu, opt.strict, tables, j_rank0, g, opt.keep_terms);
    res.coefficient = cr.value;
    res.value = res.prefactor * cr.value;
    res.decompositions = std::move(cr.decompositions);
    res.stats = cr.stats;
    if (q_of(v, g) < 0) res.diagnostics.push_back("Q(v) < 0: the invariant vanishes; a nonzero value signals inconsistent tables");
    return res;
}

enum class Rank0Strategy { Inductive, DirectFirst };

// Memoized rank-0 invariants for the sub-factors of a decomposition.
class Rank0Resolver {
public:
    Rank0Resolver(const TableSet& tables, const GeometryParams& g, const InductiveOptions& opt, Rank0Cache& cache,
                  long n_hint, Rank0Strategy strategy = Rank0Strategy::Inductive)
        : tables_(&tables), g_(g), opt_(opt), cache_(&cache), n_hint_(n_hint), strategy_(strategy) {
        opt_.keep_terms = false;
    }

    Rational operator()(const ChernData& a) const {
        if (q_of(a, g_) < 0) return 0;
        if (auto hit = cache_->get(a)) return hit->value;
        if (auto miss = failed_->find(a); miss != failed_->end()) throw miss->second;
        Rational value;
        Provenance prov;
        try {
            if (strategy_ == Rank0Strategy::DirectFirst && bound_ok(a, g_)) {
                value = method1(a, *tables_, g_).value;
                prov = Provenance::Direct;
            } else {
                const long n = choose_n(a);
                RankZeroProvider self = [this](const ChernData& b) { return (*this)(b); };
                value = method2_with(a, n, *tables_, g_, opt_, self).value;
                prov = Provenance::Inductive;
            }
        } catch (const IncompleteInputError& e) {
            failed_->emplace(a, e);
            throw;
        }
        cache_->put(a, value, prov);
        return value;
    }

    RankZeroProvider provider() const {
        return [this](const ChernData& a) { return (*this)(a); };
    }

    long choose_n(const ChernData& a) const {
        for (long n = std::max(1L, n_hint_); n <= std::max(1L, n_hint_) + opt_.n_search; ++n)
            if (validate_n(a, n, g_, opt_).ok()) return n;
        fail(ErrorKind::NSufficiencyFailed, "no n in [" + std::to_string(n_hint_) + ", " + std::to_string(n_hint_ + opt_.n_search) +
                                                "] passes the validator for " + a.str());
    }

private:
    const TableSet* tables_;
    GeometryParams g_;
    InductiveOptions opt_;
    Rank0Cache* cache_;
    long n_hint_;
    Rank0Strategy strategy_;
    // classes whose evaluation hit missing table keys; shared by copies of the resolver
    std::shared_ptr<std::map<ChernData, IncompleteInputError>> failed_ = std::make_shared<std::map<ChernData, IncompleteInputError>>();
};

inline Method2Result method2(const ChernData& v, long n, const TableSet& tables, const GeometryParams& g,
                             const InductiveOptions& opt = {}, Rank0Cache* cache = nullptr) {
    Rank0Cache local;
    Rank0Resolver resolver(tables, g, opt, cache ? *cache : local, n);
    return method2_with(v, n, tables, g, opt, resolver.provider());
}

}  // namespace wallcross
