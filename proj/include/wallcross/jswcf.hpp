#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "wallcross/kgeom.hpp"

namespace wallcross {

using OrderKey = std::variant<ExtSlope, PolyOrderKey>;
using SlopeAssignment = std::function<OrderKey(const ChernData&)>;
using Pairing = std::function<Rational(const ChernData&, const ChernData&)>;
using JLookup = std::function<std::optional<Rational>(const ChernData&)>;
using FactorTuple = std::vector<ChernData>;

inline int compare_keys(const OrderKey& a, const OrderKey& b) {
    if (a.index() != b.index()) fail(ErrorKind::InvalidArgument, "comparing slope keys of different kinds");
    if (const auto* x = std::get_if<ExtSlope>(&a)) {
        const auto& y = std::get<ExtSlope>(b);
        if (*x == y) return 0;
        return *x < y ? -1 : 1;
    }
    const auto& x = std::get<PolyOrderKey>(a);
    const auto& y = std::get<PolyOrderKey>(b);
    if (x == y) return 0;
    return x < y ? -1 : 1;
}

inline SlopeAssignment bw_slope(Rational b, Rational w, GeometryParams g) {
    return [b = std::move(b), w = std::move(w), g](const ChernData& v) -> OrderKey { return nu_bw(v, b, w, g); };
}

inline SlopeAssignment gieseker_slope(GeometryParams g) {
    return [g](const ChernData& v) -> OrderKey { return hilbert_poly(v, g).reduced(); };
}

inline SlopeAssignment tilt_slope(GeometryParams g) {
    return [g](const ChernData& v) -> OrderKey { return hilbert_poly(v, g).tilt_reduced(); };
}

inline constexpr int kDefaultMaxQ = 8;

namespace detail {

// Memoizes slope keys of the partial sums a single coefficient evaluation touches.
class KeyCache {
public:
    explicit KeyCache(const SlopeAssignment& s) : s_(s) {}
    const OrderKey& operator()(const ChernData& v) {
        auto it = cache_.find(v);
        if (it == cache_.end()) it = cache_.emplace(v, s_(v)).first;
        return it->second;
    }

private:
    const SlopeAssignment& s_;
    std::map<ChernData, OrderKey> cache_;
};

inline ChernData sum_range(const std::vector<ChernData>& xs, std::size_t lo, std::size_t hi) {
    ChernData acc(0, 0, 0, 0);
    for (std::size_t i = lo; i < hi; ++i) acc = acc + xs[i];
    return acc;
}

// Block boundaries 0 = cut[0] < ... < cut[t] = n from a bitmask over the n-1 gaps.
inline std::vector<std::size_t> cuts_from_mask(std::size_t n, unsigned long mask) {
    std::vector<std::size_t> cuts{0};
    for (std::size_t i = 1; i < n; ++i)
        if (mask & (1UL << (i - 1))) cuts.push_back(i);
    cuts.push_back(n);
    return cuts;
}

inline int s_coeff_cached(const std::vector<ChernData>& a, KeyCache& k1, KeyCache& k2) {
    const std::size_t q = a.size();
    int r = 0;
    for (std::size_t i = 0; i + 1 < q; ++i) {
        const int c1 = compare_keys(k1(a[i]), k1(a[i + 1]));
        const int c2 = compare_keys(k2(sum_range(a, 0, i + 1)), k2(sum_range(a, i + 1, q)));
        const bool cond_a = c1 <= 0 && c2 > 0;
        const bool cond_b = c1 > 0 && c2 <= 0;
        if (cond_a) ++r;
        else if (!cond_b) return 0;
    }
    return (r % 2) ? -1 : 1;
}

}  // namespace detail

inline int s_coeff(const std::vector<ChernData>& factors, const SlopeAssignment& s1, const SlopeAssignment& s2) {
    if (factors.empty()) fail(ErrorKind::InvalidArgument, "s_coeff needs q >= 1");
    detail::KeyCache k1(s1), k2(s2);
    return detail::s_coeff_cached(factors, k1, k2);
}

inline Rational u_coeff(const std::vector<ChernData>& factors, const SlopeAssignment& s1, const SlopeAssignment& s2,
                        int max_q = kDefaultMaxQ) {
    const std::size_t q = factors.size();
    if (q == 0) fail(ErrorKind::InvalidArgument, "u_coeff needs q >= 1");
    if (q > static_cast<std::size_t>(max_q)) fail(ErrorKind::QTooLarge, "q = " + std::to_string(q));
    detail::KeyCache k1(s1), k2(s2);
    const ChernData total = detail::sum_range(factors, 0, q);
    const OrderKey& total_key2 = k2(total);

    Rational result(0);
    for (unsigned long amask = 0; amask < (1UL << (q - 1)); ++amask) {
        const auto acuts = detail::cuts_from_mask(q, amask);
        const std::size_t t = acuts.size() - 1;
        std::vector<ChernData> blocks;
        bool ok = true;
        Rational block_weight(1);
        for (std::size_t i = 0; i < t && ok; ++i) {
            blocks.push_back(detail::sum_range(factors, acuts[i], acuts[i + 1]));
            const OrderKey& bkey = k1(blocks.back());
            for (std::size_t j = acuts[i]; j < acuts[i + 1]; ++j)
                if (compare_keys(bkey, k1(factors[j])) != 0) {
                    ok = false;
                    break;
                }
            block_weight /= Rational(factorial(static_cast<long>(acuts[i + 1] - acuts[i])));
        }
        if (!ok) continue;

        for (unsigned long bmask = 0; bmask < (1UL << (t - 1)); ++bmask) {
            const auto bcuts = detail::cuts_from_mask(t, bmask);
            const std::size_t p = bcuts.size() - 1;
            Rational term = block_weight * Rational((p % 2) ? 1 : -1, static_cast<long>(p));
            term.canonicalize();
            for (std::size_t i = 0; i < p && term != 0; ++i) {
                if (p > 1 && compare_keys(k2(detail::sum_range(blocks, bcuts[i], bcuts[i + 1])), total_key2) != 0) {
                    term = 0;
                    break;
                }
                std::vector<ChernData> group(blocks.begin() + static_cast<long>(bcuts[i]),
                                             blocks.begin() + static_cast<long>(bcuts[i + 1]));
                term *= detail::s_coeff_cached(group, k1, k2);
            }
            result += term;
        }
    }
    return result;
}

inline Rational u_rank_minus1_closed_form(long q, long e) {
    if (e < 1 || e > q) fail(ErrorKind::InvalidArgument, "need 1 <= e <= q");
    Rational r(1);
    r /= Rational(factorial(e - 1) * factorial(q - e));
    return (e - 1) % 2 ? Rational(-r) : r;
}

using EdgeSet = std::vector<std::pair<int, int>>;

// Spanning trees of K_q (vertices 0..q-1) with edges oriented low -> high, via Pruefer codes.
inline const std::vector<EdgeSet>& ascending_trees(int q) {
    if (q < 1) fail(ErrorKind::InvalidArgument, "ascending_trees needs q >= 1");
    if (q > kDefaultMaxQ) fail(ErrorKind::QTooLarge, "q = " + std::to_string(q));
    static std::mutex mu;
    static std::map<int, std::vector<EdgeSet>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(q);
    if (it != cache.end()) return it->second;

    std::vector<EdgeSet> trees;
    if (q == 1) trees.push_back({});
    else if (q == 2) trees.push_back({{0, 1}});
    else {
        const int len = q - 2;
        std::vector<int> code(static_cast<std::size_t>(len), 0);
        while (true) {
            std::vector<int> degree(static_cast<std::size_t>(q), 1);
            for (int x : code) ++degree[static_cast<std::size_t>(x)];
            EdgeSet edges;
            for (int x : code) {
                for (int leaf = 0; leaf < q; ++leaf) {
                    if (degree[static_cast<std::size_t>(leaf)] == 1) {
                        edges.emplace_back(std::min(leaf, x), std::max(leaf, x));
                        --degree[static_cast<std::size_t>(leaf)];
                        --degree[static_cast<std::size_t>(x)];
                        break;
                    }
                }
            }
            int u = -1, w = -1;
            for (int i = 0; i < q; ++i)
                if (degree[static_cast<std::size_t>(i)] == 1) (u < 0 ? u : w) = i;
            edges.emplace_back(u, w);
            std::sort(edges.begin(), edges.end());
            trees.push_back(std::move(edges));

            int pos = len - 1;
            while (pos >= 0 && ++code[static_cast<std::size_t>(pos)] == q) code[static_cast<std::size_t>(pos--)] = 0;
            if (pos < 0) break;
        }
        std::sort(trees.begin(), trees.end());
    }
    return cache.emplace(q, std::move(trees)).first->second;
}

// Coefficient of prod J(alpha_i) for one ordered tuple in the wall-crossing sum.
inline Rational wcf_tuple_coeff(const FactorTuple& tuple, const SlopeAssignment& s_plus, const SlopeAssignment& s_minus,
                                const Pairing& chi, int max_q = kDefaultMaxQ) {
    const int q = static_cast<int>(tuple.size());
    const Rational u = u_coeff(tuple, s_plus, s_minus, max_q);
    if (u == 0) return 0;
    std::vector<std::vector<Rational>> X(static_cast<std::size_t>(q), std::vector<Rational>(static_cast<std::size_t>(q)));
    Rational chi_sum(0);
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j) {
            X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = chi(tuple[static_cast<std::size_t>(i)], tuple[static_cast<std::size_t>(j)]);
            chi_sum += X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    Rational tree_sum(0);
    for (const auto& edges : ascending_trees(q)) {
        Rational prod(1);
        for (const auto& [i, j] : edges) {
            prod *= X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (prod == 0) break;
        }
        tree_sum += prod;
    }
    if (tree_sum == 0) return 0;
    Rational coeff = u * tree_sum / Rational(Integer(1) << (q - 1));
    return sign_pow(Rational(q - 1) + chi_sum) < 0 ? Rational(-coeff) : coeff;
}

inline Rational wcf_below(const ChernData& v, std::vector<FactorTuple> factorizations, const SlopeAssignment& s_plus,
                          const SlopeAssignment& s_minus, const JLookup& j_above, const Pairing& chi,
                          int max_q = kDefaultMaxQ) {
    auto need = [&](const ChernData& a) {
        auto val = j_above(a);
        if (!val) fail(ErrorKind::MissingJValue, "no J value for " + a.str());
        return *val;
    };
    std::sort(factorizations.begin(), factorizations.end());
    factorizations.erase(std::unique(factorizations.begin(), factorizations.end()), factorizations.end());

    Rational result = need(v);
    for (const auto& tuple : factorizations) {
        if (tuple.size() < 2) fail(ErrorKind::InvalidArgument, "factorizations must have q >= 2");
        if (detail::sum_range(tuple, 0, tuple.size()) != v)
            fail(ErrorKind::InvalidArgument, "factor tuple does not sum to " + v.str());
        Rational jprod(1);
        for (const auto& a : tuple) jprod *= need(a);
        if (jprod == 0) continue;
        result += wcf_tuple_coeff(tuple, s_plus, s_minus, chi, max_q) * jprod;
    }
    return result;
}

// Tilt-semistable invariant from Gieseker ones; the Gieseker side plays the role of "above".
inline Rational gieseker_tilt_below(const ChernData& v, std::vector<FactorTuple> factorizations, const JLookup& j_gieseker,
                                    const GeometryParams& g) {
    Pairing chi = [g](const ChernData& a, const ChernData& b) { return euler_pairing(a, b, g); };
    return wcf_below(v, std::move(factorizations), gieseker_slope(g), tilt_slope(g), j_gieseker, chi);
}

// (w+, w-) straddling w0 at fixed b with no other slope coincidence among subset sums of the classes in between.
inline std::pair<Rational, Rational> wall_sides(const std::vector<ChernData>& classes, const Rational& b, const Rational& w0,
                                                const GeometryParams& g) {
    if (!in_U(b, w0)) fail(ErrorKind::OutsideU, "wall point not above the parabola");
    const std::size_t n = classes.size();
    std::vector<ChernData> sums;
    for (unsigned long mask = 1; mask < (1UL << n); ++mask) {
        ChernData acc(0, 0, 0, 0);
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1UL << i)) acc = acc + classes[i];
        sums.push_back(acc);
    }
    const Rational H3 = g.H3();
    Rational gap = w0 - b * b / 2;
    for (std::size_t i = 0; i < sums.size(); ++i)
        for (std::size_t j = i + 1; j < sums.size(); ++j) {
            const auto& A = sums[i];
            const auto& B = sums[j];
            const Rational dA = A.c - b * A.r * H3, dB = B.c - b * B.r * H3;
            const Rational coef = H3 * (B.r * dA - A.r * dB);
            if (coef == 0) continue;
            const Rational wc = (B.s * dA - A.s * dB) / coef;
            if (wc != w0) gap = std::min(gap, Rational(abs(wc - w0)));
        }
    const Rational eps = gap / 2;
    return {w0 + eps, w0 - eps};
}

}  // namespace wallcross
