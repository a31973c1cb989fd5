// Batch front end. Exit codes: 0 ok, 1 other error, 2 BoundViolated, 3 IncompleteInput, 4 OSV mismatch.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "acceptance_suite.hpp"
#include "wallcross/wallcross.hpp"

namespace wc = wallcross;

namespace {

enum Exit { kOk = 0, kOther = 1, kBound = 2, kIncomplete = 3, kOsvMismatch = 4 };

struct Options {
    std::string config, cls, out, xi = "1", strictness = "paper", table_path;
    long n = 0, k = 1;
    std::optional<long> seed;
    bool verbose = false;
};

wc::RunConfig load(const Options& o) {
    std::string path = o.config;
    if (path.empty())
        if (const char* env = std::getenv("WALLCROSS_CONFIG")) path = env;
    if (path.empty()) return wc::RunConfig{};
    return wc::load_config(path);
}

// "flip" inverts every boundary-inclusion choice relative to the configuration.
void apply_strictness(const Options& o, wc::RunConfig& cfg) {
    if (o.strictness == "paper") return;
    auto toggle = [&](const std::string& key) { cfg.set(key, cfg.flag(key) ? "false" : "true"); };
    toggle("inductive.strict");
    toggle("rank2.odd_inclusive");
    toggle("rank2.even_inclusive");
}

wc::Json envelope(const std::string& command, const wc::RunConfig& cfg) {
    wc::Json j;
    j["command"] = command;
    j["config_hash"] = wc::config_hash(cfg);
    return j;
}

void emit(const Options& o, const wc::Json& report) {
    if (o.out.empty()) {
        if (o.verbose) std::cout << report.dump(2) << '\n';
        return;
    }
    wc::write_atomic(o.out, report.dump(2) + "\n");
    std::cout << "report written to " << o.out << '\n';
}

long pick_n(const Options& o, const std::function<bool(long)>& ok, long n_search) {
    if (o.n > 0) return o.n;
    for (long n = 1; n <= n_search; ++n)
        if (ok(n)) return n;
    wc::fail(wc::ErrorKind::NSufficiencyFailed, "no n in [1, " + std::to_string(n_search) + "] passes the validator; pass --n");
}

int cmd_rank0_direct(const Options& o) {
    wc::RunConfig cfg = load(o);
    const auto g = cfg.geometry();
    const wc::ChernData v = wc::parse_class(o.cls);
    const wc::Method1Result r = wc::method1(v, cfg.tables(), g);
    if (r.vanishing) std::cout << "J = 0 (vanishing: Q(v) < 0)\n";
    else std::cout << "J = " << wc::to_string(r.value) << '\n';
    for (const auto& d : r.diagnostics)
        if (o.verbose || d.rfind("warning", 0) == 0) std::cerr << d << '\n';
    wc::Json j = envelope("rank0-direct", cfg);
    j["result"] = wc::method1_json(v, r, g);
    emit(o, j);
    return kOk;
}

int cmd_rank0_inductive(const Options& o) {
    wc::RunConfig cfg = load(o);
    apply_strictness(o, cfg);
    const auto g = cfg.geometry();
    const wc::InductiveOptions opt = [&] {
        auto x = cfg.inductive();
        x.keep_terms = true;
        return x;
    }();
    const wc::ChernData v = wc::parse_class(o.cls);
    const long n = pick_n(o, [&](long m) { return wc::validate_n(v, m, g, opt).ok(); }, opt.n_search);
    const wc::TableSet tables = cfg.tables();
    const wc::Method2Result r = wc::method2(v, n, tables, g, opt);
    std::cout << "J = " << wc::to_string(r.value) << "  (n = " << n << ", chi = " << wc::to_string(r.chi)
              << ", coefficient = " << wc::to_string(r.coefficient) << ")\n";
    if (o.verbose)
        std::cerr << r.decompositions.size() << " decompositions, " << r.stats.nodes << " search nodes\n";
    for (const auto& d : r.diagnostics) std::cerr << d << '\n';
    wc::Json j = envelope("rank0-inductive", cfg);
    j["class"] = wc::class_json(v);
    j["n"] = n;
    j["chi"] = wc::q_json(r.chi);
    j["prefactor"] = wc::q_json(r.prefactor);
    j["mu"] = wc::q_json(r.mu);
    j["coefficient"] = wc::q_json(r.coefficient);
    j["J"] = wc::q_json(r.value);
    wc::Json ds = wc::Json::array();
    for (const auto& d : r.decompositions) ds.push_back(wc::decomposition_json(d));
    j["decompositions"] = ds;
    j["diagnostics"] = r.diagnostics;
    emit(o, j);
    return kOk;
}

int cmd_rank2(const Options& o) {
    wc::RunConfig cfg = load(o);
    apply_strictness(o, cfg);
    const auto g = cfg.geometry();
    wc::Rank2Options opt = cfg.rank2();
    opt.keep_terms = true;
    const wc::ChernData alpha = wc::parse_class(o.cls);
    const wc::Rank2Reduction red = wc::reduce_rank2(alpha, g);
    const long n = pick_n(o, [&](long m) { return wc::validate_rank2_n(red, m, g).ok(); }, opt.rank0.n_search);
    const wc::Rank2Result r = wc::rank2(alpha, n, cfg.tables(), g, opt);
    std::cout << "J = " << wc::to_string(r.value) << "  (" << (red.odd ? "odd" : "even") << " case, n = " << n << ")\n";
    for (const auto& d : r.diagnostics) std::cerr << d << '\n';
    wc::Json j = envelope("rank2", cfg);
    j["class"] = wc::class_json(alpha);
    j["reduced"] = wc::class_json(red.w);
    j["parity"] = red.odd ? "odd" : "even";
    j["n"] = n;
    j["chi"] = wc::q_json(r.chi);
    j["prefactor"] = wc::q_json(r.prefactor);
    j["mu"] = wc::q_json(r.mu);
    j["coefficient"] = wc::q_json(r.coefficient);
    j["A_wn"] = wc::q_json(r.a_wn);
    j["J_tilt"] = wc::q_json(r.j_tilt);
    j["tilt_correction"] = wc::q_json(r.tilt_correction);
    j["J"] = wc::q_json(r.value);
    wc::Json terms = wc::Json::array();
    for (const auto& t : r.terms)
        terms.push_back({{"kind", t.kind}, {"a", wc::class_json(t.a)}, {"b", wc::class_json(t.b)}, {"coeff", wc::q_json(t.coeff)}, {"value", wc::q_json(t.value)}});
    j["terms"] = terms;
    wc::Json ds = wc::Json::array();
    for (const auto& d : r.decompositions) ds.push_back(wc::decomposition_json(d));
    j["decompositions"] = ds;
    j["diagnostics"] = r.diagnostics;
    emit(o, j);
    return kOk;
}

int cmd_osv_check(const Options& o) {
    wc::RunConfig cfg = load(o);
    const auto g = cfg.geometry();
    const wc::Rational xi = wc::parse_rational(o.xi);
    const wc::OsvParams p = wc::params_for(xi, g, cfg.integer("osv.k_probe"));
    const wc::OsvRegion region = wc::OsvRegion::of(p, o.k, cfg.flag("osv.two_sided"));
    const wc::OsvWindow w = cfg.osv_window();
    const wc::TableSet tables = o.seed ? wc::testkit::osv_tables(static_cast<std::uint64_t>(*o.seed), region, 60, g) : cfg.tables();
    const auto lhs = wc::osv_lhs(o.k, region, tables, g, w), rhs = wc::osv_rhs(o.k, region, tables, g, w);
    const wc::OsvComparison cmp = wc::compare_osv(o.k, p, lhs, rhs, g);
    std::cout << "k = " << o.k << ", xi = " << wc::to_string(xi) << ", mu = " << wc::to_string(p.mu) << ", delta = " << wc::to_string(p.delta)
              << ", kmin = " << p.kmin << '\n';
    std::cout << cmp.rows.size() << " monomials, " << cmp.mismatches << " mismatches, " << cmp.excluded_mismatches
              << " tolerated in the excluded region\n";
    wc::Json j = envelope("osv-check", cfg);
    j["k"] = o.k;
    j["xi"] = wc::q_json(xi);
    j["mu"] = wc::q_json(p.mu);
    j["delta"] = wc::q_json(p.delta);
    j["kmin"] = p.kmin;
    if (o.seed) j["seed"] = *o.seed;
    wc::Json rows = wc::Json::array();
    for (const auto& r : cmp.rows) {
        rows.push_back({{"x", wc::q_json(r.mono.xe)},
                        {"y", wc::q_json(r.mono.ye)},
                        {"lhs", wc::q_json(r.lhs)},
                        {"rhs", wc::q_json(r.rhs)},
                        {"diff", wc::q_json(r.lhs - r.rhs)},
                        {"excluded", r.excluded}});
        if (o.verbose)
            std::cout << "  x^" << wc::to_string(r.mono.xe) << " y^" << wc::to_string(r.mono.ye) << "  lhs " << wc::to_string(r.lhs)
                      << "  rhs " << wc::to_string(r.rhs) << (r.excluded ? "  (excluded)" : "") << '\n';
    }
    j["rows"] = rows;
    j["mismatches"] = cmp.mismatches;
    emit(o, j);
    return cmp.mismatches ? kOsvMismatch : kOk;
}

int cmd_walls(const Options& o) {
    wc::RunConfig cfg = load(o);
    const auto g = cfg.geometry();
    const wc::ChernData v = wc::parse_class(o.cls);
    const wc::WallsReport rep = wc::walls_report(v, g);
    const std::string svg = wc::walls_svg(rep, g);
    if (o.out.empty()) {
        std::cout << svg;
    } else {
        wc::write_atomic(o.out, svg);
        std::cout << rep.walls.size() << " wall(s) written to " << o.out << '\n';
    }
    return kOk;
}

int cmd_table_validate(const Options& o) {
    wc::RunConfig cfg = load(o);
    const wc::TableSet t = o.table_path.empty() ? cfg.tables() : wc::load_tables(o.table_path);
    for (const auto* tab : {&t.pt, &t.dt1}) {
        std::cout << wc::kind_letter(tab->kind()) << ": " << tab->entries().size() << " entries in " << tab->windows().size()
                  << " window(s)";
        bool integral = true;
        for (const auto& [key, val] : tab->entries()) integral = integral && wc::is_integer(val);
        std::cout << (integral ? ", integral" : ", non-integral values present") << '\n';
    }
    return kOk;
}

int cmd_selftest(const Options& o) {
    namespace acc = wc::acceptance;
    std::string path = o.config;
    if (path.empty())
        if (const char* env = std::getenv("WALLCROSS_CONFIG")) path = env;
    const acc::Context ctx = acc::load_context(path.empty() ? acc::default_config_path() : std::filesystem::path(path));
    long failed = 0;
    acc::run(ctx, [&](const acc::CriterionResult& r) {
        failed += !r.pass;
        if (o.verbose || !r.pass) std::cout << acc::format(r) << std::endl;
    });
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
    return failed ? kOther : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact DT invariants of rank 0 and rank 2 on a Picard-rank-one Calabi-Yau threefold"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "configuration file (falls back to $WALLCROSS_CONFIG)");
    app.add_flag("-v,--verbose", o.verbose, "print terms, rows and timings");

    auto with_class = [&](CLI::App* sub) { sub->add_option("--class", o.cls, "class as r,c,s,d with exact rationals")->required(); };
    auto with_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "output path, written atomically"); };
    auto with_strict = [&](CLI::App* sub) {
        sub->add_option("--strictness", o.strictness, "boundary inclusion: paper or flip")->check(CLI::IsMember({"paper", "flip"}));
    };

    auto* direct = app.add_subcommand("rank0-direct", "rank-0 invariant from PT/DT1 tables by the direct splitting formula");
    with_class(direct);
    with_out(direct);
    auto* inductive = app.add_subcommand("rank0-inductive", "rank-0 invariant by the rank -1 decomposition formula");
    with_class(inductive);
    with_out(inductive);
    with_strict(inductive);
    inductive->add_option("--n", o.n, "twist n (default: smallest passing the validator)");
    auto* r2 = app.add_subcommand("rank2", "rank-2 invariant, odd or even ch1");
    with_class(r2);
    with_out(r2);
    with_strict(r2);
    r2->add_option("--n", o.n, "twist n (default: smallest passing the validator)");
    auto* osv = app.add_subcommand("osv-check", "compare both sides of the generating-series identity");
    osv->add_option("--k", o.k, "multiple of the hyperplane class")->check(CLI::PositiveNumber);
    osv->add_option("--xi", o.xi, "exponent xi >= 1");
    osv->add_option("--seed", o.seed, "use seeded synthetic tables instead of the configured ones");
    with_out(osv);
    auto* walls = app.add_subcommand("walls", "SVG diagram of the walls of a rank-0 class");
    with_class(walls);
    with_out(walls);
    auto* tv = app.add_subcommand("table-validate", "parse and summarise a table file");
    tv->add_option("path", o.table_path, "table file (default: tables.path of the configuration)");
    auto* self = app.add_subcommand("selftest", "run the acceptance suite");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*direct) return cmd_rank0_direct(o);
        if (*inductive) return cmd_rank0_inductive(o);
        if (*r2) return cmd_rank2(o);
        if (*osv) return cmd_osv_check(o);
        if (*walls) return cmd_walls(o);
        if (*tv) return cmd_table_validate(o);
        if (*self) return cmd_selftest(o);
    } catch (const wc::IncompleteInputError& e) {
        std::cerr << "IncompleteInput: missing table keys:\n";
        for (const auto& key : e.missing_keys()) std::cerr << "  " << key << '\n';
        if (e.truncated()) std::cerr << "  (list truncated at " << wc::kMissingKeyCap << " keys)\n";
        return kIncomplete;
    } catch (const wc::Error& e) {
        std::cerr << e.what() << '\n';
        return e.kind() == wc::ErrorKind::BoundViolated ? kBound : kOther;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kOther;
}
