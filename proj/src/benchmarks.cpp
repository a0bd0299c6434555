#include "mabs/benchmarks.hpp"

#include "mabs/approx.hpp"
#include "mabs/error.hpp"
#include "mabs/parser.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>

namespace mabs {

namespace {

class GraphBuilder {
public:
    GraphBuilder(std::string name, const std::map<std::string, int>& constants) : constants_(constants) {
        g_.name = std::move(name);
    }

    GraphBuilder& location(std::string name) {
        g_.locations.push_back({std::move(name), std::nullopt});
        if (g_.initial.empty()) g_.initial = g_.locations.back().name;
        return *this;
    }
    GraphBuilder& var(std::string name, int lo, int hi, int init = 0) {
        g_.privates.push_back({std::move(name), lo, hi, init, VarKind::Private});
        return *this;
    }
    GraphBuilder& edge(std::string src, std::string tgt, std::string_view selects, std::string_view guard,
                       std::string_view sync, std::string_view updates) {
        Edge e;
        e.source = std::move(src);
        e.target = std::move(tgt);
        if (!selects.empty()) e.selects = parse_selects(selects, constants_);
        if (!guard.empty()) e.guard = parse_expr(guard);
        if (!sync.empty()) e.sync = parse_sync(sync);
        if (!updates.empty()) e.updates = parse_updates(updates);
        g_.edges.push_back(std::move(e));
        return *this;
    }
    AgentGraph build() { return std::move(g_); }

private:
    const std::map<std::string, int>& constants_;
    AgentGraph g_;
};

VarDecl global(std::string name, int lo, int hi, int init = 0) {
    return {std::move(name), lo, hi, init, VarKind::Global};
}

} // namespace

MasTemplate build_postal(int nv, int nc) {
    if (nv < 1 || nc < 1) throw SpecError("postal voting needs NV >= 1 and NC >= 1");
    MasTemplate m;
    m.constants = {{"NV", nv}, {"NC", nc}};
    auto k = m.constant_map();
    m.globals = {global("ep_sent", 0, nv),  global("b_recv", 0, nv),    global("dec_recv", 0, nv),
                 global("decl_cnt", 0, nv), global("decl_val", 0, 2), global("sent_post", 0, nv)};
    m.channels = {"send_decl", "collect", "deliver", "cast"};

    GraphBuilder voter("Voter", k);
    voter.location("idle").location("waits").location("has").location("voted");
    voter.var("mem_dec", 0, 2).var("mem_vt", 0, nc).var("mem_sg", 0, 1);
    voter.edge("idle", "waits", "dec : int[1,2]", "", "send_decl!", "mem_dec = dec, decl_val = dec")
        .edge("waits", "has", "", "mem_dec == 1", "collect?", "")
        .edge("waits", "has", "", "mem_dec == 2", "deliver?", "")
        .edge("has", "voted", "vt : int[1,NC], sg : int[0,1]", "", "cast!", "mem_vt = vt, mem_sg = sg");

    GraphBuilder auth("Authority", k);
    auth.location("coll_decl").location("distr").location("coll_vts").location("tally");
    auth.edge("coll_decl", "coll_decl", "", "decl_cnt < NV", "send_decl?",
              "dec_recv = dec_recv + (decl_val == 2), decl_cnt++, decl_val = 0")
        .edge("coll_decl", "distr", "", "decl_cnt == NV", "", "")
        .edge("distr", "distr", "", "ep_sent - sent_post < NV - dec_recv", "collect!", "ep_sent++")
        .edge("distr", "distr", "", "sent_post < dec_recv", "deliver!", "ep_sent++, sent_post++")
        .edge("distr", "coll_vts", "", "ep_sent == NV", "", "")
        .edge("coll_vts", "coll_vts", "", "b_recv < NV", "cast?", "b_recv++")
        .edge("coll_vts", "tally", "", "b_recv == NV", "", "dec_recv = 0");

    m.templates.push_back({voter.build(), nv});
    m.templates.push_back({auth.build(), 1});
    validate(m);
    return m;
}

MasTemplate build_social_ai(int nag) {
    if (nag < 2) throw SpecError("social AI needs at least 2 agents");
    MasTemplate m;
    m.constants = {{"NA", nag}};
    auto k = m.constant_map();
    m.globals = {global("impersonated", 0, nag), global("sh_to", 0, nag), global("sh_q", 0, 3)};

    // Each agent gathers data, learns a model, then sends it to its ring successor and
    // receives one from its predecessor, in either order, through a one-slot mailbox.
    GraphBuilder ai("AI", k);
    ai.location("gather").location("learn").location("ready").location("sent").location("recvd").location("wait");
    ai.var("data", 0, 3).var("peer_q", 0, 3).var("mqual", 0, 3);
    const char* send_guard = "sh_to == 0 && impersonated != 0 && impersonated != id";
    const char* send = "sh_to = id % NA + 1, sh_q = mqual";
    const char* recv = "peer_q = sh_q, mqual = (mqual + sh_q) / 2, sh_to = 0, sh_q = 0";
    ai.edge("gather", "gather", "", "data < 3", "", "data++")
        .edge("gather", "learn", "", "data >= 1", "", "")
        .edge("learn", "ready", "", "", "", "mqual = (data + 1) / 2")
        .edge("ready", "sent", "", send_guard, "", send)
        .edge("ready", "recvd", "", "sh_to == id", "", recv)
        .edge("sent", "wait", "", "sh_to == id", "", recv)
        .edge("recvd", "wait", "", send_guard, "", send);

    // The attacker impersonates one agent and always shares the lowest quality.
    GraphBuilder attacker("Attacker", k);
    attacker.location("idle").location("posing").location("done");
    attacker.edge("idle", "posing", "i : int[1,NA]", "", "", "impersonated = i")
        .edge("posing", "done", "", "sh_to == 0", "", "sh_to = impersonated % NA + 1, sh_q = 0");

    m.templates.push_back({ai.build(), nag});
    m.templates.push_back({attacker.build(), 1});
    validate(m);
    return m;
}

std::vector<AbstractionStep> benchmark_abstraction(std::string_view name) {
    auto step = [](std::string target, std::vector<std::string> remove, std::vector<std::string> scope = {}) {
        AbstractionStep s;
        s.mapping.target = std::move(target);
        s.mapping.remove = std::move(remove);
        s.mapping.scope = std::move(scope);
        return s;
    };
    if (name == "A1") return {step("Voter", {"mem_vt", "mem_sg"})};
    if (name == "A2")
        return {step("Voter", {"mem_dec"}, {"has", "voted"}), step("Authority", {"dec_recv"}, {"coll_vts"})};
    if (name == "A3") {
        auto a = benchmark_abstraction("A1");
        auto b = benchmark_abstraction("A2");
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }
    if (name == "mqual") return {step("AI", {"data", "peer_q"})};
    throw SpecError("unknown benchmark abstraction '" + std::string(name) + "'");
}

MasTemplate apply_steps(const MasTemplate& m, const std::vector<AbstractionStep>& steps,
                        std::vector<std::string>* warnings) {
    MasTemplate cur = m;
    for (const auto& s : steps) {
        LocalDomain d = approximate(cur, s.mapping.target, s.mapping.remove, s.tag);
        AbstractionResult r = abstract(cur, s.mapping, d);
        if (warnings) warnings->insert(warnings->end(), r.warnings.begin(), r.warnings.end());
        cur = std::move(r.model);
    }
    return cur;
}

double reduction(std::uint64_t concrete, std::uint64_t abstract) {
    if (concrete == 0) return 0;
    return (1.0 - static_cast<double>(abstract) / static_cast<double>(concrete)) * 100.0;
}

namespace {

const std::map<std::string, std::map<int, double>>& published_values(const std::string& family) {
    static const std::map<std::string, std::map<int, double>> postal = {
        {"concrete", {{1, 31}, {2, 529}, {3, 10891}, {4, 2.3e5}, {5, 5.1e6}}},
        {"A1", {{1, 23}, {2, 217}, {3, 2203}, {4, 22625}, {5, 2.3e5}, {6, 2.3e6}, {7, 2.2e7}}},
        {"A2", {{1, 22}, {2, 214}, {3, 2440}, {4, 29938}, {5, 3.7e5}, {6, 4.9e6}}},
        {"A3", {{1, 18}, {2, 120}, {3, 838}, {4, 5937}, {5, 42100}, {6, 2.9e5}, {7, 2.0e6}, {8, 1.4e7}}},
    };
    static const std::map<std::string, std::map<int, double>> social = {
        {"concrete", {{2, 165}, {3, 8917}, {4, 4.6e5}, {5, 2.1e7}}},
        {"mqual", {{2, 38}, {3, 555}, {4, 10247}, {5, 1.5e5}, {6, 2.8e6}, {7, 4.1e7}}},
    };
    return family == "postal" ? postal : social;
}

BenchRow run_point(const std::string& family, int param, const std::string& config, const MasTemplate& concrete,
                   std::string_view query, const ExploreOptions& opts) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    MasTemplate model = config == "concrete" ? concrete : apply_steps(concrete, benchmark_abstraction(config));
    System sys = build_system(model);
    CheckResult r = check(sys, parse_query(query), opts);
    BenchRow row;
    row.family = family;
    row.param = param;
    row.config = config;
    row.states = r.stats.states;
    row.transitions = r.stats.transitions;
    row.verdict = r.verdict;
    row.time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    const auto& published = published_values(family);
    if (auto it = published.find(config); it != published.end())
        if (auto jt = it->second.find(param); jt != it->second.end()) row.published_states = jt->second;
    return row;
}

std::vector<BenchRow> run_grid(const std::string& family, const std::vector<std::string>& configs,
                               const BenchOptions& opts) {
    std::vector<int> params;
    for (int p = opts.from; p <= opts.to; ++p) params.push_back(p);
    std::vector<std::vector<BenchRow>> per(params.size());
    std::vector<std::exception_ptr> errors(params.size());
    auto point = [&](std::size_t i) {
        try {
            int p = params[i];
            MasTemplate concrete = family == "postal" ? build_postal(p, opts.nc) : build_social_ai(p);
            std::string_view query = family == "postal" ? kBallotStuffing : kCompromised;
            for (const auto& c : configs) per[i].push_back(run_point(family, p, c, concrete, query, opts.explore));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    unsigned workers = std::max(1u, std::min<unsigned>(opts.grid_threads, static_cast<unsigned>(params.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < params.size(); ++i) point(i);
    } else {
        std::mutex mu;
        std::size_t next = 0;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t i;
                    {
                        std::lock_guard lock(mu);
                        if (next >= params.size()) return;
                        i = next++;
                    }
                    point(i);
                }
            });
        for (auto& t : pool) t.join();
    }
    std::vector<BenchRow> rows;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        rows.insert(rows.end(), per[i].begin(), per[i].end());
    }
    return rows;
}

std::string fmt_count(std::uint64_t n) {
    char buf[32];
    if (n < 100000) {
        std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(n));
    } else {
        std::snprintf(buf, sizeof buf, "%.1e", static_cast<double>(n));
    }
    return buf;
}

std::string fmt_published(double v) {
    char buf[32];
    if (v < 100000) std::snprintf(buf, sizeof buf, "%.0f", v);
    else std::snprintf(buf, sizeof buf, "%.1e", v);
    return buf;
}

std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
}

} // namespace

std::vector<BenchRow> run_postal(const BenchOptions& opts) {
    return run_grid("postal", {"concrete", "A1", "A2", "A3"}, opts);
}

std::vector<BenchRow> run_social(const BenchOptions& opts) {
    return run_grid("social", {"concrete", "mqual"}, opts);
}

std::string format_table(const std::vector<BenchRow>& rows) {
    if (rows.empty()) return "";
    std::vector<std::string> configs;
    std::map<int, std::map<std::string, const BenchRow*>> grid;
    for (const auto& r : rows) {
        if (std::find(configs.begin(), configs.end(), r.config) == configs.end()) configs.push_back(r.config);
        grid[r.param][r.config] = &r;
    }
    const bool social = rows.front().family == "social";
    const std::string key = social ? "#Ag" : "#V";
    std::string out;
    auto line = [&](const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
        for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? " | " : "") + pad(cells[i], widths[i]);
        out += "\n";
    };

    std::vector<std::string> head{key};
    std::vector<std::size_t> widths{4};
    for (const auto& c : configs) {
        head.push_back(c + " #St");
        head.push_back("t");
        widths.push_back(std::max<std::size_t>(10, c.size() + 4));
        widths.push_back(7);
    }
    if (social) {
        head.push_back("Reduct");
        widths.push_back(7);
    }
    line(head, widths);
    for (const auto& [param, cells] : grid) {
        std::vector<std::string> row{std::to_string(param)};
        for (const auto& c : configs) {
            auto it = cells.find(c);
            if (it == cells.end()) {
                row.insert(row.end(), {"-", "-"});
                continue;
            }
            const BenchRow& r = *it->second;
            char t[32];
            std::snprintf(t, sizeof t, "%.2f", r.time_ms / 1000.0);
            row.push_back(r.verdict == Verdict::Inconclusive ? "memout" : fmt_count(r.states));
            row.push_back(t);
        }
        if (social) {
            auto c = cells.find("concrete");
            auto a = cells.find("mqual");
            std::string red = "--";
            if (c != cells.end() && a != cells.end() && c->second->verdict != Verdict::Inconclusive &&
                a->second->verdict != Verdict::Inconclusive) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f", reduction(c->second->states, a->second->states));
                red = buf;
            }
            row.push_back(red);
        }
        line(row, widths);
    }

    out += "\nstates vs published (ours / published)\n";
    std::vector<std::string> head2{key};
    std::vector<std::size_t> widths2{4};
    for (const auto& c : configs) {
        head2.push_back(c);
        widths2.push_back(26);
    }
    line(head2, widths2);
    for (const auto& [param, cells] : grid) {
        std::vector<std::string> row{std::to_string(param)};
        for (const auto& c : configs) {
            auto it = cells.find(c);
            if (it == cells.end() || !it->second->published_states) {
                row.push_back("-");
                continue;
            }
            const BenchRow& r = *it->second;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%s / %s (x%.2f)", fmt_count(r.states).c_str(),
                          fmt_published(*r.published_states).c_str(), static_cast<double>(r.states) / *r.published_states);
            row.push_back(buf);
        }
        line(row, widths2);
    }
    return out;
}

std::string format_json_lines(const std::vector<BenchRow>& rows) {
    std::string out;
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["family"] = r.family;
        if (r.family == "postal") j["params"] = {{"NV", r.param}};
        else j["params"] = {{"NAg", r.param}};
        j["config"] = r.config;
        j["states"] = r.states;
        j["transitions"] = r.transitions;
        j["time_ms"] = r.time_ms;
        j["verdict"] = std::string(to_string(r.verdict));
        if (r.published_states) j["published_states"] = *r.published_states;
        out += j.dump() + "\n";
    }
    return out;
}

} // namespace mabs
