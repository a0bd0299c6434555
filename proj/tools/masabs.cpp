// masabs: command-line front end for the abstraction library.

#include "mabs/abstractor.hpp"
#include "mabs/approx.hpp"
#include "mabs/benchmarks.hpp"
#include "mabs/checker.hpp"
#include "mabs/config.hpp"
#include "mabs/error.hpp"
#include "mabs/model_io.hpp"
#include "mabs/parser.hpp"
#include "mabs/unfold.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>
#include <set>

using namespace mabs;

namespace {

enum Exit { kOk = 0, kInputError = 1, kUsage = 2, kInconclusive = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string input, output, config, domain, query, query_file;
    std::string target, vars, type, scope, merge_name, merge_initial, merge_expr, always;
    std::uint64_t cap = 0;
    unsigned threads = 0;
    bool json = false;
    std::string suite = "postal", emit;
    int from = 0, to = 0, nc = 3;
};

Config load_config(const Options& o, bool may_be_missing) {
    Config c;
    if (o.config.empty()) return c;
    if (!std::filesystem::exists(o.config)) {
        if (may_be_missing) return c;
        throw Error("cannot open config '" + o.config + "'");
    }
    std::vector<std::string> warnings;
    c = read_config(read_file(o.config), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return c;
}

/// Flags override the config file.
void apply_flags(Config& c, const Options& o) {
    auto set = [&](std::string_view key, const std::string& v) {
        if (v.empty()) return;
        try {
            set_config_value(c, key, v);
        } catch (const FormatError& e) {
            throw UsageError(e.what());
        }
    };
    set("input", o.input);
    set("output", o.output);
    set("target", o.target);
    set("variables", o.vars);
    set("type", o.type);
    set("scope", o.scope);
    set("merge.name", o.merge_name);
    set("merge.initial", o.merge_initial);
    set("merge.expr", o.merge_expr);
    set("domain", o.domain);
    set("always_available", o.always);
    set("query", o.query);
    if (o.cap) c.cap = o.cap;
    if (o.threads) c.threads = o.threads;
    if (c.merge && (c.merge->name.empty() || c.merge->expr.empty()))
        throw UsageError("a merge needs both --merge-name and --merge-expr");
}

const std::string& need(const std::string& value, const char* what) {
    if (value.empty()) throw UsageError(std::string("missing ") + what);
    return value;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_file(path, text);
        std::cout << path << "\n";
    }
}

int cmd_configure(const Options& o) {
    Config c = load_config(o, true);
    apply_flags(c, o);
    std::string text = write_config(c);
    if (!o.config.empty()) write_file(o.config, text);
    std::cout << text;
    return kOk;
}

int cmd_unfold(const Config& c) {
    MasTemplate m = parse_model(read_file(need(c.input, "--input")));
    CombinedGraph g = combine(m);
    for (const auto& w : g.warnings) std::cerr << "warning: " << w << "\n";
    emit(c.output, serialize_model(to_model(g)));
    return kOk;
}

ApproxOptions approx_options(const Config& c) {
    ApproxOptions a;
    a.always_available = c.always_available;
    return a;
}

int cmd_approx(const Config& c) {
    MasTemplate m = parse_model(read_file(need(c.input, "--input")));
    if (c.variables.empty()) throw UsageError("missing --vars");
    LocalDomain d = approximate(m, need(c.target, "--target"), c.variables, c.type.value_or(DomainTag::Upper),
                                approx_options(c));
    emit(c.output, write_domain(d));
    return kOk;
}

int cmd_abstract(const Config& c) {
    MasTemplate m = parse_model(read_file(need(c.input, "--input")));
    if (c.variables.empty()) throw UsageError("missing --vars");
    need(c.target, "--target");
    LocalDomain d = read_domain(read_file(need(c.domain, "--domain")));
    AbstractionResult r = abstract(m, mapping_from_config(c), d, approx_options(c));
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    emit(c.output, serialize_model(r.model));
    return kOk;
}

int cmd_info(const Config& c, bool json) {
    MasTemplate m = parse_model(read_file(need(c.input, "--input")));
    if (json) {
        nlohmann::ordered_json j;
        j["constants"] = nlohmann::ordered_json::object();
        for (const auto& [n, v] : m.constants) j["constants"][n] = v;
        j["channels"] = m.channels;
        auto vars = [](const std::vector<VarDecl>& vs) {
            nlohmann::ordered_json a = nlohmann::ordered_json::array();
            for (const auto& v : vs) a.push_back({{"name", v.name}, {"lo", v.lo}, {"hi", v.hi}, {"initial", v.initial}});
            return a;
        };
        j["globals"] = vars(m.globals);
        j["templates"] = nlohmann::ordered_json::array();
        for (const auto& t : m.templates) {
            nlohmann::ordered_json tj;
            tj["name"] = t.graph.name;
            tj["count"] = t.count;
            tj["variables"] = vars(t.graph.privates);
            std::vector<std::string> locs;
            for (const auto& l : t.graph.locations) locs.push_back(l.name);
            tj["locations"] = locs;
            tj["initial"] = t.graph.initial;
            std::vector<std::string> edges;
            for (const auto& e : t.graph.edges) edges.push_back(describe(t.graph.name, e));
            tj["edges"] = edges;
            j["templates"].push_back(tj);
        }
        std::cout << j.dump(2) << "\n";
        return kOk;
    }
    auto print_vars = [](const std::vector<VarDecl>& vs, const char* indent) {
        for (const auto& v : vs)
            std::cout << indent << v.name << " : int[" << v.lo << "," << v.hi << "] = " << v.initial << "\n";
    };
    if (!m.constants.empty()) {
        std::cout << "constants:\n";
        for (const auto& [n, v] : m.constants) std::cout << "  " << n << " = " << v << "\n";
    }
    if (!m.channels.empty()) {
        std::cout << "channels:";
        for (const auto& ch : m.channels) std::cout << " " << ch;
        std::cout << "\n";
    }
    if (!m.globals.empty()) {
        std::cout << "global variables:\n";
        print_vars(m.globals, "  ");
    }
    for (const auto& t : m.templates) {
        std::cout << "template " << t.graph.name << " (" << t.count << " instance" << (t.count == 1 ? "" : "s")
                  << ")\n";
        if (!t.graph.privates.empty()) {
            std::cout << "  variables:\n";
            print_vars(t.graph.privates, "    ");
        }
        std::cout << "  locations:";
        for (const auto& l : t.graph.locations) std::cout << " " << l.name << (l.name == t.graph.initial ? "*" : "");
        std::cout << "\n  edges:\n";
        for (const auto& e : t.graph.edges) std::cout << "    " << describe(t.graph.name, e) << "\n";
    }
    return kOk;
}

ExploreOptions explore_options(const Config& c) {
    ExploreOptions e;
    if (c.cap) e.state_cap = *c.cap;
    if (c.threads) e.threads = *c.threads;
    return e;
}

int cmd_check(const Config& c, const Options& o) {
    MasTemplate m = parse_model(read_file(need(c.input, "--input")));
    System sys = build_system(m);
    std::string query = c.query;
    if (!o.query_file.empty()) query = read_file(o.query_file);
    ExploreOptions opts = explore_options(c);
    if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
        ExploreStats s = explore(sys, opts);
        std::string result = s.complete ? "complete" : "inconclusive";
        if (o.json) {
            nlohmann::ordered_json j{{"states", s.states},
                                     {"transitions", s.transitions},
                                     {"peak_frontier", s.peak_frontier},
                                     {"result", result},
                                     {"time_ms", s.time_ms}};
            std::cout << j.dump() << "\n";
        } else {
            std::cout << "states: " << s.states << "\ntransitions: " << s.transitions
                      << "\npeak frontier: " << s.peak_frontier << "\nresult: " << result
                      << (s.complete ? "" : " (cap)") << "\ntime: " << s.time_ms << " ms\n";
        }
        return s.complete ? kOk : kInconclusive;
    }
    Query q = parse_query(query);
    CheckResult r = check(sys, q, opts);
    if (o.json) {
        nlohmann::ordered_json j{{"query", to_string(q)},
                                 {"states", r.stats.states},
                                 {"transitions", r.stats.transitions},
                                 {"result", std::string(to_string(r.verdict))},
                                 {"time_ms", r.stats.time_ms}};
        nlohmann::ordered_json trace = nlohmann::ordered_json::array();
        for (const auto& st : r.trace) trace.push_back({{"edge", st.label}, {"state", describe(sys, st.state)}});
        j["trace"] = trace;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << to_string(q) << ": " << to_string(r.verdict)
                  << (r.verdict == Verdict::Inconclusive ? " (cap)" : "") << "\n";
        if (!r.trace.empty()) {
            std::cout << (q.kind == Query::Kind::Invariant ? "counterexample:\n" : "witness:\n");
            for (const auto& st : r.trace) {
                if (!st.label.empty()) std::cout << "  -- " << st.label << "\n";
                std::cout << "  " << describe(sys, st.state) << "\n";
            }
        }
        std::cout << "states: " << r.stats.states << ", transitions: " << r.stats.transitions
                  << ", time: " << r.stats.time_ms << " ms\n";
    }
    return r.verdict == Verdict::Inconclusive ? kInconclusive : kOk;
}

/// Writes the concrete and abstract benchmark models of the grid as model files.
int emit_models(const Options& o) {
    namespace fs = std::filesystem;
    fs::create_directories(o.emit);
    bool postal = o.suite == "postal";
    if (!postal && o.suite != "social") throw UsageError("unknown suite '" + o.suite + "' (postal or social)");
    int from = o.from ? o.from : (postal ? 1 : 2);
    int to = o.to ? o.to : (postal ? 3 : 4);
    std::vector<std::string> configs = postal ? std::vector<std::string>{"A1", "A2", "A3"} : std::vector<std::string>{"mqual"};
    for (int n = from; n <= to; ++n) {
        MasTemplate m = postal ? build_postal(n, o.nc) : build_social_ai(n);
        std::string stem = postal ? "postal_nv" + std::to_string(n) + "_nc" + std::to_string(o.nc) : "social_nag" + std::to_string(n);
        std::vector<std::pair<std::string, MasTemplate>> files{{stem + ".xml", m}};
        for (const auto& name : configs)
            files.emplace_back(stem + "_" + name + ".xml", apply_steps(m, benchmark_abstraction(name)));
        for (const auto& [file, model] : files) {
            std::string path = (fs::path(o.emit) / file).string();
            write_file(path, serialize_model(model));
            std::cout << path << "\n";
        }
    }
    return kOk;
}

int cmd_bench(const Config& c, const Options& o) {
    BenchOptions b;
    b.explore = explore_options(c);
    b.explore.threads = 1;
    b.grid_threads = c.threads.value_or(1);
    b.nc = o.nc;
    if (!o.emit.empty()) return emit_models(o);
    std::vector<BenchRow> rows;
    if (o.suite == "postal") {
        b.from = o.from ? o.from : 1;
        b.to = o.to ? o.to : 3;
        rows = run_postal(b);
    } else if (o.suite == "social") {
        b.from = o.from ? o.from : 2;
        b.to = o.to ? o.to : 4;
        rows = run_social(b);
    } else {
        throw UsageError("unknown suite '" + o.suite + "' (postal or social)");
    }
    if (o.json) {
        std::cout << format_json_lines(rows);
    } else {
        std::cout << format_table(rows);
    }
    bool inconclusive = false;
    for (const auto& r : rows) inconclusive = inconclusive || r.verdict == Verdict::Inconclusive;
    return inconclusive ? kInconclusive : kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-removal abstraction of multi-agent system models"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--input,-i", o.input, "Model file");
    app.add_option("--output,-o", o.output, "Output file ('-' for stdout)");
    app.add_option("--config,-c", o.config, "Configuration file");
    app.add_option("--cap", o.cap, "State cap for exploration")->check(CLI::PositiveNumber);
    app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--json", o.json, "Machine-readable output");

    auto mapping_flags = [&](CLI::App* sub) {
        sub->add_option("--target", o.target, "Template name or 'ext'");
        sub->add_option("--vars", o.vars, "Comma-separated variables");
        sub->add_option("--type", o.type, "upper or lower");
        sub->add_option("--scope", o.scope, "Comma-separated scope locations");
        sub->add_option("--merge-name", o.merge_name, "Merge variable name");
        sub->add_option("--merge-initial", o.merge_initial, "Merge variable initial value");
        sub->add_option("--merge-expr", o.merge_expr, "Merge expression over removed variables");
        sub->add_option("--always-available", o.always, "Channels a lower approximation may cross");
    };
    auto* configure = app.add_subcommand("configure", "Set parameters in the configuration file");
    mapping_flags(configure);
    configure->add_option("--domain", o.domain, "Domain file");
    configure->add_option("--query", o.query, "Query text");
    auto* unfold = app.add_subcommand("unfold", "Write the combined MAS graph");
    auto* approx = app.add_subcommand("approx", "Approximate the local domain of variables");
    mapping_flags(approx);
    auto* abstr = app.add_subcommand("abstract", "Generate an abstract model from a domain");
    mapping_flags(abstr);
    abstr->add_option("--domain", o.domain, "Domain file");
    auto* info = app.add_subcommand("info", "List variables, locations and edges");
    auto* chk = app.add_subcommand("check", "Check A[] p or E<> p, or print exploration statistics");
    chk->add_option("--query,-q", o.query, "Query text");
    chk->add_option("--query-file", o.query_file, "File holding the query");
    auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
    bench->add_option("suite", o.suite, "postal or social");
    bench->add_option("--from", o.from, "First grid point")->check(CLI::PositiveNumber);
    bench->add_option("--to", o.to, "Last grid point")->check(CLI::PositiveNumber);
    bench->add_option("--nc", o.nc, "Candidates (postal)")->check(CLI::PositiveNumber);
    bench->add_option("--emit", o.emit, "Write the grid's model files to this directory instead of running");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (configure->parsed()) return cmd_configure(o);
        Config c = load_config(o, false);
        apply_flags(c, o);
        if (unfold->parsed()) return cmd_unfold(c);
        if (approx->parsed()) return cmd_approx(c);
        if (abstr->parsed()) return cmd_abstract(c);
        if (info->parsed()) return cmd_info(c, o.json);
        if (chk->parsed()) return cmd_check(c, o);
        if (bench->parsed()) return cmd_bench(c, o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kUsage;
}
