#include "mabs/unfold.hpp"

#include "mabs/error.hpp"

#include <deque>
#include <map>

namespace mabs {

std::vector<AgentGraph> instantiate(const MasTemplate& m) {
    std::vector<AgentGraph> out;
    for (const auto& entry : m.templates) {
        const AgentGraph& t = entry.graph;
        if (entry.count < 1) throw SpecError("template " + t.name + ": instance count must be at least 1");
        for (int k = 1; k <= entry.count; ++k) {
            AgentGraph a;
            a.name = instance_name(t.name, k);
            a.locations = t.locations;
            a.initial = t.initial;
            a.components = t.components;

            std::map<std::string, int> constants = m.constant_map();
            for (const auto& [n, v] : t.constants) constants[n] = v;
            constants["id"] = k;

            std::map<std::string, std::string> renamed;
            std::map<std::string, ExprPtr> subst;
            for (const auto& v : t.privates) {
                VarDecl q = v;
                q.name = a.name + "." + v.name;
                renamed[v.name] = q.name;
                subst[v.name] = ref(q.name);
                a.privates.push_back(q);
            }
            auto rewrite = [&](const ExprPtr& e) -> ExprPtr {
                if (!e) return e;
                return fold(substitute(e, subst), constants);
            };
            for (const auto& edge : t.edges) {
                for (auto& x : expand_selects(edge)) {
                    x.guard = rewrite(x.guard);
                    if (auto v = literal_value(x.guard); v && *v != 0) x.guard = nullptr;
                    for (auto& u : x.updates) {
                        if (auto it = renamed.find(u.target); it != renamed.end()) u.target = it->second;
                        u.value = rewrite(u.value);
                    }
                    a.edges.push_back(std::move(x));
                }
            }
            out.push_back(std::move(a));
        }
    }
    return out;
}

namespace {

struct AgentIndex {
    // Per location: internal and send edges in declaration order.
    std::vector<std::vector<std::size_t>> active;
    // channel -> per location receive edges
    std::map<std::string, std::vector<std::vector<std::size_t>>> receives;
};

} // namespace

CombinedGraph combine(const std::vector<AgentGraph>& agents, const std::vector<VarDecl>& globals) {
    CombinedGraph c;
    c.graph.name = std::string(kCombinedTemplate);
    for (const auto& a : agents) c.graph.components.push_back(a.name);
    c.variables = globals;
    for (const auto& a : agents)
        for (auto v : a.privates) {
            v.kind = VarKind::Global;
            c.variables.push_back(v);
        }
    if (agents.empty()) {
        c.graph.locations.push_back({"", std::nullopt});
        c.graph.initial = "";
        return c;
    }

    std::vector<AgentIndex> index(agents.size());
    std::map<std::string, std::vector<std::size_t>> senders, receivers;  // channel -> agents
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const auto& a = agents[i];
        auto& ix = index[i];
        ix.active.resize(a.locations.size());
        for (std::size_t e = 0; e < a.edges.size(); ++e) {
            const Edge& edge = a.edges[e];
            if (!edge.selects.empty()) throw SpecError(describe(a.name, edge) + ": selects must be expanded first");
            auto src = a.location_index(edge.source);
            if (!src || !a.has_location(edge.target))
                throw SpecError(describe(a.name, edge) + ": edge endpoint is not a location");
            if (edge.sync && edge.sync->dir == SyncDir::Receive) {
                auto& per_loc = ix.receives[edge.sync->channel];
                per_loc.resize(a.locations.size());
                per_loc[*src].push_back(e);
                receivers[edge.sync->channel].push_back(i);
            } else {
                ix.active[*src].push_back(e);
                if (edge.sync) senders[edge.sync->channel].push_back(i);
            }
        }
    }
    auto has_partner = [](const std::map<std::string, std::vector<std::size_t>>& side, const std::string& ch,
                          std::size_t self) {
        auto it = side.find(ch);
        if (it == side.end()) return false;
        for (auto j : it->second)
            if (j != self) return true;
        return false;
    };
    for (std::size_t i = 0; i < agents.size(); ++i)
        for (const auto& e : agents[i].edges)
            if (e.sync && !has_partner(e.sync->dir == SyncDir::Send ? receivers : senders, e.sync->channel, i))
                c.warnings.push_back(describe(agents[i].name, e) + ": no synchronisation partner, edge dropped");

    using Vec = std::vector<std::size_t>;
    std::map<Vec, std::size_t> seen;
    std::vector<Vec> order;
    std::deque<std::size_t> work;
    auto intern = [&](const Vec& v) {
        auto [it, inserted] = seen.emplace(v, order.size());
        if (inserted) {
            order.push_back(v);
            work.push_back(it->second);
        }
        return it->second;
    };
    auto name_of = [&](const Vec& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += '.';
            s += agents[i].locations[v[i]].name;
        }
        return s;
    };

    Vec init;
    for (const auto& a : agents) init.push_back(*a.location_index(a.initial));
    intern(init);
    while (!work.empty()) {
        const Vec from = order[work.front()];
        work.pop_front();
        const std::string from_name = name_of(from);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            for (auto ei : index[i].active[from[i]]) {
                const Edge& e = agents[i].edges[ei];
                Vec to = from;
                to[i] = *agents[i].location_index(e.target);
                if (!e.sync) {
                    intern(to);
                    c.graph.edges.push_back({from_name, name_of(to), {}, e.guard, std::nullopt, e.updates});
                    continue;
                }
                for (std::size_t j = 0; j < agents.size(); ++j) {
                    if (j == i) continue;
                    auto rit = index[j].receives.find(e.sync->channel);
                    if (rit == index[j].receives.end()) continue;
                    for (auto fi : rit->second[from[j]]) {
                        const Edge& f = agents[j].edges[fi];
                        Vec joint = to;
                        joint[j] = *agents[j].location_index(f.target);
                        intern(joint);
                        Edge x;
                        x.source = from_name;
                        x.target = name_of(joint);
                        x.guard = conjoin(e.guard, f.guard);
                        x.updates = e.updates;
                        x.updates.insert(x.updates.end(), f.updates.begin(), f.updates.end());
                        c.graph.edges.push_back(std::move(x));
                    }
                }
            }
        }
    }
    for (const auto& v : order) c.graph.locations.push_back({name_of(v), std::nullopt});
    c.graph.initial = name_of(init);
    return c;
}

CombinedGraph combine(const MasTemplate& m) {
    if (is_combined(m)) return as_combined(m);
    validate(m);
    CombinedGraph c = combine(instantiate(m), m.globals);
    c.constants = m.constants;
    return c;
}

MasTemplate to_model(const CombinedGraph& c) {
    MasTemplate m;
    m.constants = c.constants;
    m.globals = c.variables;
    m.templates.push_back({c.graph, 1});
    return m;
}

bool is_combined(const MasTemplate& m) {
    return m.templates.size() == 1 && !m.templates[0].graph.components.empty() && m.templates[0].count == 1;
}

CombinedGraph as_combined(const MasTemplate& m) {
    if (!is_combined(m)) throw SpecError("model is not a combined graph");
    CombinedGraph c;
    c.graph = m.templates[0].graph;
    c.variables = m.globals;
    c.constants = m.constants;
    if (!c.graph.privates.empty()) throw SpecError("combined graph must declare all variables globally");
    if (!m.channels.empty()) {
        for (const auto& e : c.graph.edges)
            if (e.sync) throw SpecError("combined graph edge carries a sync label");
    }
    return c;
}

} // namespace mabs
