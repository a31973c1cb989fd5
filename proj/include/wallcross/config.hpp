#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "wallcross/kgeom.hpp"
#include "wallcross/osv.hpp"
#include "wallcross/rank0_inductive.hpp"
#include "wallcross/rank2.hpp"

namespace wallcross {

// Every recognised key with its default; parsing rejects anything else.
inline const std::map<std::string, std::string>& config_defaults() {
    static const std::map<std::string, std::string> d{
        {"geometry.h3", "5"},
        {"geometry.c2h", "50"},
        {"geometry.tors", "1"},
        {"lattice.beta_den", "2"},
        {"lattice.m_den", "6"},
        {"tables.path", ""},
        {"inductive.window", "adopted"},
        {"inductive.strict", "false"},
        {"inductive.width_slack", "0"},
        {"inductive.n_search", "10"},
        {"rank2.odd_inclusive", "true"},
        {"rank2.even_inclusive", "false"},
        {"rank2.correction", "engine"},
        {"rank2.rank0_strategy", "direct-first"},
        {"osv.d1_lo", "-2"},
        {"osv.d1_hi", "2"},
        {"osv.x_span", "4"},
        {"osv.two_sided", "false"},
        {"osv.k_probe", "10"},
    };
    return d;
}

struct RunConfig {
    std::map<std::string, std::string> values = config_defaults();
    std::filesystem::path base_dir = ".";

    const std::string& get(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
        return it->second;
    }
    Rational rational(const std::string& key) const { return parse_rational(get(key)); }
    long integer(const std::string& key) const {
        const Rational q = rational(key);
        if (!is_integer(q)) fail(ErrorKind::ConfigError, key + " must be an integer");
        return to_long(q.get_num());
    }
    bool flag(const std::string& key) const {
        const std::string& v = get(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail(ErrorKind::ConfigError, key + " must be true or false, got '" + v + "'");
    }
    void set(const std::string& key, const std::string& value) {
        if (!config_defaults().count(key)) fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
        values[key] = value;
    }

    GeometryParams geometry() const {
        GeometryParams g;
        g.h3 = integer("geometry.h3");
        g.c2h = integer("geometry.c2h");
        g.tors = integer("geometry.tors");
        g.beta_den = integer("lattice.beta_den");
        g.m_den = integer("lattice.m_den");
        g.validate();
        return g;
    }

    std::filesystem::path resolve(const std::string& p) const {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }

    TableSet tables() const {
        const std::string& p = get("tables.path");
        if (p.empty()) return TableSet{};
        return load_tables(resolve(p).string());
    }

    InductiveOptions inductive() const {
        InductiveOptions o;
        const std::string& w = get("inductive.window");
        if (w == "adopted") o.window = KappaWindow::Adopted;
        else if (w == "printed") o.window = KappaWindow::Printed;
        else fail(ErrorKind::ConfigError, "inductive.window must be adopted or printed");
        o.strict = flag("inductive.strict");
        o.width_slack = rational("inductive.width_slack");
        o.n_search = integer("inductive.n_search");
        return o;
    }

    Rank2Options rank2() const {
        Rank2Options o;
        o.odd_inclusive = flag("rank2.odd_inclusive");
        o.even_inclusive = flag("rank2.even_inclusive");
        const std::string& c = get("rank2.correction");
        if (c == "engine") o.correction = TiltCorrection::Engine;
        else if (c == "printed") o.correction = TiltCorrection::Printed;
        else fail(ErrorKind::ConfigError, "rank2.correction must be engine or printed");
        const std::string& s = get("rank2.rank0_strategy");
        if (s == "direct-first") o.rank0_strategy = Rank0Strategy::DirectFirst;
        else if (s == "inductive") o.rank0_strategy = Rank0Strategy::Inductive;
        else fail(ErrorKind::ConfigError, "rank2.rank0_strategy must be direct-first or inductive");
        o.rank0 = inductive();
        return o;
    }

    OsvWindow osv_window() const {
        OsvWindow w;
        w.d1_lo = integer("osv.d1_lo");
        w.d1_hi = integer("osv.d1_hi");
        w.x_span = integer("osv.x_span");
        return w;
    }

    // Sorted key = value lines; the hash of this text identifies a run.
    std::string canonical() const {
        std::ostringstream out;
        for (const auto& [k, v] : values) out << k << " = " << v << '\n';
        return out.str();
    }
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const RunConfig& c) {
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << fnv1a64(c.canonical());
    return out.str();
}

inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
    RunConfig cfg;
    cfg.base_dir = base_dir;
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (!config_defaults().count(key))
            fail(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        cfg.values[key] = value;
    }
    cfg.geometry();
    cfg.inductive();
    cfg.rank2();
    cfg.osv_window();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ConfigError, "cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::filesystem::path(path).parent_path());
}

}  // namespace wallcross
