#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wallcross/kgeom.hpp"

namespace wallcross {

enum class TableKind { PT, DT1 };

inline char kind_letter(TableKind k) { return k == TableKind::PT ? 'P' : 'I'; }

struct TableWindow {
    long deg_min = 0, deg_max = -1;
    Rational m_min, m_max;

    bool contains(const Rational& m, const Rational& deg) const {
        return deg >= deg_min && deg <= deg_max && m >= m_min && m <= m_max;
    }
    friend bool operator==(const TableWindow& a, const TableWindow& b) {
        return a.deg_min == b.deg_min && a.deg_max == b.deg_max && a.m_min == b.m_min && a.m_max == b.m_max;
    }
};

struct TableKey {
    Rational m;
    long deg;
    friend bool operator<(const TableKey& a, const TableKey& b) {
        if (a.deg != b.deg) return a.deg < b.deg;
        return a.m < b.m;
    }
    friend bool operator==(const TableKey& a, const TableKey& b) { return a.deg == b.deg && a.m == b.m; }
};

inline std::string key_name(TableKind kind, const Rational& m, const Rational& deg) {
    return std::string(1, kind_letter(kind)) + "[m=" + to_string(m) + ",deg=" + to_string(deg) + "]";
}

class InvariantTable {
public:
    explicit InvariantTable(TableKind kind = TableKind::PT) : kind_(kind) {}

    TableKind kind() const { return kind_; }
    const std::map<TableKey, Rational>& entries() const { return entries_; }
    const std::vector<TableWindow>& windows() const { return windows_; }

    void add_window(const TableWindow& w) { windows_.push_back(w); }

    void insert(const Rational& m, long deg, const Rational& value) {
        if (!covered(m, Rational(deg)))
            fail(ErrorKind::EntryOutsideWindow, key_name(kind_, m, Rational(deg)) + " lies outside every #range window");
        if (!entries_.emplace(TableKey{m, deg}, value).second)
            fail(ErrorKind::DuplicateKey, key_name(kind_, m, Rational(deg)));
    }

    bool covered(const Rational& m, const Rational& deg) const {
        for (const auto& w : windows_)
            if (w.contains(m, deg)) return true;
        return false;
    }

    // Inside a window: stored value or 0 (a non-integral degree is never a curve class). Outside: nullopt.
    std::optional<Rational> try_lookup(const Rational& m, const Rational& deg) const {
        if (!covered(m, deg)) return std::nullopt;
        if (!is_integer(deg)) return Rational(0);
        auto it = entries_.find(TableKey{m, deg.get_num().get_si()});
        return it == entries_.end() ? Rational(0) : it->second;
    }

    Rational lookup(const Rational& m, const Rational& deg) const {
        auto v = try_lookup(m, deg);
        if (!v) fail(ErrorKind::OutsideWindow, key_name(kind_, m, deg));
        return *v;
    }

    friend bool operator==(const InvariantTable& a, const InvariantTable& b) {
        return a.kind_ == b.kind_ && a.entries_ == b.entries_ && a.windows_ == b.windows_;
    }

private:
    TableKind kind_;
    std::map<TableKey, Rational> entries_;
    std::vector<TableWindow> windows_;
};

struct TableSet {
    InvariantTable pt{TableKind::PT};
    InvariantTable dt1{TableKind::DT1};

    InvariantTable& of(TableKind k) { return k == TableKind::PT ? pt : dt1; }
    const InvariantTable& of(TableKind k) const { return k == TableKind::PT ? pt : dt1; }
    friend bool operator==(const TableSet& a, const TableSet& b) { return a.pt == b.pt && a.dt1 == b.dt1; }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline long parse_long(const std::string& s) {
    Rational q = parse_rational(s);
    if (!is_integer(q)) fail(ErrorKind::ParseError, "expected an integer, got '" + s + "'");
    return to_long(q.get_num());
}

inline TableKind parse_kind(const std::string& s) {
    if (s == "P") return TableKind::PT;
    if (s == "I") return TableKind::DT1;
    fail(ErrorKind::ParseError, "table kind must be P or I, got '" + s + "'");
}

}  // namespace detail

// Grammar, one item per line:
//   #range <P|I> <deg_min:int> <deg_max:int> <m_min:rat> <m_max:rat>
//   <P|I> <m:rat> <deg:int> <value:rat>
//   # anything else starting with '#' is a comment; blank lines are ignored.
inline TableSet parse_tables(const std::string& text) {
    TableSet out;
    struct Pending {
        TableKind kind;
        Rational m;
        long deg;
        Rational value;
        int line;
    };
    std::vector<Pending> data;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto toks = detail::split_ws(line);
        if (toks.empty()) continue;
        try {
            if (toks[0] == "#range") {
                if (toks.size() != 6) fail(ErrorKind::ParseError, "#range needs 5 fields");
                TableWindow w{detail::parse_long(toks[2]), detail::parse_long(toks[3]), parse_rational(toks[4]),
                              parse_rational(toks[5])};
                out.of(detail::parse_kind(toks[1])).add_window(w);
                continue;
            }
            if (toks[0][0] == '#') continue;
            if (toks.size() != 4) fail(ErrorKind::ParseError, "data line needs 4 fields");
            data.push_back({detail::parse_kind(toks[0]), parse_rational(toks[1]), detail::parse_long(toks[2]),
                            parse_rational(toks[3]), lineno});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ParseError) throw;
            fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    for (const auto& p : data) {
        try {
            out.of(p.kind).insert(p.m, p.deg, p.value);
        } catch (const Error& e) {
            throw Error(e.kind(), "line " + std::to_string(p.line) + ": " + e.what());
        }
    }
    return out;
}

inline TableSet load_tables(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ParseError, "cannot open table file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_tables(buf.str());
}

inline std::string save_tables(const TableSet& t) {
    std::ostringstream out;
    for (TableKind k : {TableKind::PT, TableKind::DT1}) {
        const auto& tab = t.of(k);
        for (const auto& w : tab.windows())
            out << "#range " << kind_letter(k) << ' ' << w.deg_min << ' ' << w.deg_max << ' ' << to_string(w.m_min) << ' '
                << to_string(w.m_max) << '\n';
        for (const auto& [key, val] : tab.entries())
            out << kind_letter(k) << ' ' << to_string(key.m) << ' ' << key.deg << ' ' << to_string(val) << '\n';
    }
    return out.str();
}

// Deterministic across platforms: raw mt19937_64 words, no std distributions.
inline InvariantTable synthetic_table(std::uint64_t seed, TableKind kind, const std::vector<TableWindow>& windows,
                                      long denominator_bound, long numerator_bound = 9) {
    if (denominator_bound < 1) fail(ErrorKind::InvalidArgument, "denominator bound must be >= 1");
    std::mt19937_64 rng(seed);
    InvariantTable t(kind);
    for (const auto& w : windows) t.add_window(w);
    std::set<TableKey> seen;
    for (const auto& w : windows) {
        const long m_lo = to_long(ceil_q(w.m_min)), m_hi = to_long(floor_q(w.m_max));
        for (long deg = w.deg_min; deg <= w.deg_max; ++deg)
            for (long m = m_lo; m <= m_hi; ++m) {
                const long num = static_cast<long>(rng() % static_cast<std::uint64_t>(2 * numerator_bound + 1)) - numerator_bound;
                const long den = 1 + static_cast<long>(rng() % static_cast<std::uint64_t>(denominator_bound));
                if (!seen.insert(TableKey{Rational(m), deg}).second) continue;
                if (num != 0) t.insert(Rational(m), deg, make_q(num, den));
            }
    }
    return t;
}

// Lookups that record missing keys instead of throwing, so a pipeline can report them together.
// Past kMissingKeyCap keys the lookup throws a truncated IncompleteInputError.
class TableView {
public:
    TableView(const TableSet& tables, long tors) : tables_(&tables), tors_(tors) {}

    Rational pt(const Rational& m, const Rational& deg) const { return get(TableKind::PT, m, deg); }
    Rational dt1(const Rational& m, const Rational& deg) const { return get(TableKind::DT1, m, deg); }
    long tors() const { return tors_; }

    const std::set<std::string>& missing() const { return missing_; }
    void throw_if_missing() const {
        if (!missing_.empty()) throw IncompleteInputError({missing_.begin(), missing_.end()});
    }

private:
    Rational get(TableKind k, const Rational& m, const Rational& deg) const {
        auto v = tables_->of(k).try_lookup(m, deg);
        if (!v) {
            std::unique_lock lock(mu_);
            missing_.insert(key_name(k, m, deg));
            if (missing_.size() >= kMissingKeyCap)
                throw IncompleteInputError(std::vector<std::string>(missing_.begin(), std::next(missing_.begin(), kMissingKeyCap)), true);
            return 0;
        }
        return *v;
    }

    const TableSet* tables_;
    long tors_;
    mutable std::shared_mutex mu_;
    mutable std::set<std::string> missing_;
};

enum class Provenance { Direct, Inductive, External };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Direct: return "direct";
        case Provenance::Inductive: return "inductive";
        case Provenance::External: return "external";
    }
    return "?";
}

class Rank0Cache {
public:
    struct Entry {
        Rational value;
        Provenance provenance;
    };

    std::optional<Entry> get(const ChernData& v) const {
        std::shared_lock lock(mu_);
        auto it = map_.find(v);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    void put(const ChernData& v, const Rational& value, Provenance prov) {
        if (v.r != 0) fail(ErrorKind::InvalidArgument, "Rank0Cache holds rank-0 classes only");
        std::unique_lock lock(mu_);
        auto [it, fresh] = map_.emplace(v, Entry{value, prov});
        if (!fresh && it->second.value != value)
            fail(ErrorKind::CacheConflict, v.str() + ": cached " + to_string(it->second.value) + " vs new " + to_string(value));
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return map_.size();
    }

private:
    mutable std::shared_mutex mu_;
    std::map<ChernData, Entry> map_;
};

}  // namespace wallcross
