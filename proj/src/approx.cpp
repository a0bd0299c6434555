#include "mabs/approx.hpp"

#include "mabs/error.hpp"
#include "mabs/unfold.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace mabs {

const VarDecl& TargetView::var(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end()) throw SpecError("unknown variable '" + name + "' in target " + target);
    return it->second;
}

TargetView make_target(const MasTemplate& m, const std::string& target) {
    TargetView v;
    v.target = target;
    if (target == kExtTarget) {
        v.ext = true;
        CombinedGraph c = combine(m);
        v.graph = std::move(c.graph);
        for (const auto& d : c.variables) v.vars[d.name] = d;
        v.constants = {c.constants.begin(), c.constants.end()};
        return v;
    }
    const TemplateEntry* entry = m.find_template(target);
    if (!entry) throw SpecError("unknown template '" + target + "'");
    const AgentGraph& t = entry->graph;
    v.count = entry->count;
    v.constants = m.constant_map();
    for (const auto& [n, x] : t.constants) v.constants[n] = x;
    for (const auto& d : m.globals) v.vars[d.name] = d;
    for (const auto& d : t.privates) v.vars[d.name] = d;
    v.vars["id"] = VarDecl{"id", 1, entry->count, 1, VarKind::Private};

    v.graph = t;
    v.graph.edges.clear();
    for (const auto& edge : t.edges) {
        for (auto& x : expand_selects(edge)) {
            if (x.guard) x.guard = fold(x.guard, v.constants);
            if (auto g = literal_value(x.guard); g && *g != 0) x.guard = nullptr;
            for (auto& u : x.updates) u.value = fold(u.value, v.constants);
            v.graph.edges.push_back(std::move(x));
        }
    }
    return v;
}

namespace {

std::set<std::string> edge_reads(const Edge& e) {
    std::set<std::string> names = free_names(e.guard);
    for (const auto& u : e.updates) {
        auto r = free_names(u.value);
        names.insert(r.begin(), r.end());
    }
    return names;
}

} // namespace

void check_target_variables(const MasTemplate& m, const TargetView& view, const std::vector<std::string>& vars) {
    if (vars.empty()) throw SpecError("no variables selected");
    std::set<std::string> seen;
    for (const auto& name : vars) {
        if (!seen.insert(name).second) throw SpecError("variable '" + name + "' listed twice");
        if (name == "id" && !view.ext) throw SpecError("'id' is a constant of each instance, not a variable");
        if (!view.vars.count(name)) throw SpecError("unknown variable '" + name + "' in target " + view.target);
        if (view.ext) continue;
        if (view.graph.find_private(name)) continue;
        if (view.count != 1)
            throw SpecError("global '" + name + "' is shared by " + std::to_string(view.count) + " instances of " +
                            view.target + "; use target ext");
        for (const auto& entry : m.templates) {
            if (entry.graph.name == view.target) continue;
            for (const auto& e : entry.graph.edges) {
                bool writes = std::any_of(e.updates.begin(), e.updates.end(),
                                          [&](const Update& u) { return u.target == name; });
                if (writes || edge_reads(e).count(name))
                    throw SpecError("global '" + name + "' is also used by template " + entry.graph.name +
                                    "; use target ext");
            }
        }
    }
}

namespace {

std::uint64_t saturating_product(const std::vector<const VarDecl*>& ds) {
    std::uint64_t n = 1;
    for (const auto* d : ds) {
        auto s = static_cast<std::uint64_t>(d->size());
        if (n > (std::uint64_t{1} << 40) / s) return std::uint64_t{1} << 40;
        n *= s;
    }
    return n;
}

/// Upper transfer when the completions are too many to enumerate: any component an
/// update computes from an unknown ranges over the variable's whole domain.
std::vector<ValueVector> tainted_transfer(const TargetView& view, const Edge& e, const std::vector<std::string>& vars,
                                          const ValueVector& pre, const ApproxOptions& opts) {
    MapEnv env;
    for (const auto& [n, x] : view.constants) env.values[n] = x;
    for (std::size_t i = 0; i < vars.size(); ++i) env.values[vars[i]] = pre[i];
    for (const auto& u : e.updates) {
        auto names = free_names(u.value);
        bool known = std::all_of(names.begin(), names.end(), [&](const std::string& n) { return env.values.count(n); });
        if (!known) {
            env.values.erase(u.target);
            continue;
        }
        try {
            int x = eval(*u.value, env);
            if (!view.var(u.target).contains(x)) return {};
            env.values[u.target] = x;
        } catch (const EvalError&) {
            return {};
        }
    }
    std::vector<std::pair<int, int>> ranges;
    std::uint64_t total = 1;
    for (const auto& n : vars) {
        auto it = env.values.find(n);
        if (it != env.values.end()) {
            ranges.emplace_back(it->second, it->second);
        } else {
            const VarDecl& d = view.var(n);
            ranges.emplace_back(d.lo, d.hi);
            total *= static_cast<std::uint64_t>(d.size());
        }
        if (total > opts.vector_cap)
            throw ResourceError("domain too large: edge " + describe(view.target, e) + " yields over " +
                                std::to_string(opts.vector_cap) + " vectors");
    }
    std::vector<ValueVector> out;
    ValueVector cur;
    for (auto& r : ranges) cur.push_back(r.first);
    while (true) {
        out.push_back(cur);
        std::size_t i = ranges.size();
        while (i > 0) {
            --i;
            if (cur[i] < ranges[i].second) {
                ++cur[i];
                break;
            }
            cur[i] = ranges[i].first;
            if (i == 0) return out;
        }
        if (ranges.empty()) return out;
    }
}

} // namespace

EdgeTransfer transfer(const TargetView& view, const Edge& e, const std::vector<std::string>& vars,
                      const ValueVector& pre, DomainTag tag, const ApproxOptions& opts) {
    const bool upper = tag != DomainTag::Lower;
    EdgeTransfer out;
    std::set<std::string> in_v(vars.begin(), vars.end());
    std::vector<std::string> unknown;
    std::vector<const VarDecl*> ranges;
    for (const auto& n : edge_reads(e)) {
        if (in_v.count(n) || view.constants.count(n)) continue;
        unknown.push_back(n);
        ranges.push_back(&view.var(n));
    }
    if (saturating_product(ranges) > opts.completion_cap) {
        if (upper) {
            out.posts = tainted_transfer(view, e, vars, pre, opts);
            std::sort(out.posts.begin(), out.posts.end());
        } else {
            out.dropped = true;
        }
        return out;
    }

    MapEnv base;
    for (const auto& [n, x] : view.constants) base.values[n] = x;
    for (std::size_t i = 0; i < vars.size(); ++i) base.values[vars[i]] = pre[i];
    std::vector<int> completion;
    for (const auto* d : ranges) completion.push_back(d->lo);
    std::set<ValueVector> posts;
    while (true) {
        MapEnv env = base;
        for (std::size_t i = 0; i < unknown.size(); ++i) env.values[unknown[i]] = completion[i];
        bool fired = true;
        try {
            if (e.guard && eval(*e.guard, env) == 0) fired = false;
            for (std::size_t k = 0; fired && k < e.updates.size(); ++k) {
                const Update& u = e.updates[k];
                int x = eval(*u.value, env);
                if (!view.var(u.target).contains(x)) fired = false;
                else env.values[u.target] = x;
            }
        } catch (const EvalError&) {
            fired = false;
        }
        if (!fired && !upper) {
            out.dropped = true;
            return out;
        }
        if (fired) {
            ValueVector post;
            for (const auto& n : vars) post.push_back(env.values.at(n));
            posts.insert(std::move(post));
            if (!upper && posts.size() > 1) {
                out.dropped = true;
                return out;
            }
        }
        std::size_t i = completion.size();
        bool done = true;
        while (i > 0) {
            --i;
            if (completion[i] < ranges[i]->hi) {
                ++completion[i];
                done = false;
                break;
            }
            completion[i] = ranges[i]->lo;
        }
        if (done) break;
    }
    out.posts.assign(posts.begin(), posts.end());
    return out;
}

LocalDomain approximate(const MasTemplate& m, const std::string& target, const std::vector<std::string>& vars,
                        DomainTag tag, const ApproxOptions& opts) {
    if (tag == DomainTag::Exact) throw SpecError("approximation type must be upper or lower");
    TargetView view = make_target(m, target);
    check_target_variables(m, view, vars);
    const AgentGraph& g = view.graph;
    const bool upper = tag == DomainTag::Upper;

    std::vector<std::vector<const Edge*>> out_edges(g.locations.size());
    for (const auto& e : g.edges) {
        if (e.sync && !view.ext && !upper &&
            std::find(opts.always_available.begin(), opts.always_available.end(), e.sync->channel) ==
                opts.always_available.end())
            continue;
        out_edges[*g.location_index(e.source)].push_back(&e);
    }

    std::vector<std::set<ValueVector>> dom(g.locations.size());
    std::deque<std::pair<std::size_t, ValueVector>> work;
    std::uint64_t total = 0;
    auto add = [&](std::size_t loc, ValueVector v) {
        if (dom[loc].insert(v).second) {
            if (++total > opts.vector_cap)
                throw ResourceError("domain too large at location " + g.locations[loc].name + " (over " +
                                    std::to_string(opts.vector_cap) + " vectors)");
            work.emplace_back(loc, std::move(v));
        }
    };
    ValueVector init;
    for (const auto& n : vars) init.push_back(view.var(n).initial);
    add(*g.location_index(g.initial), init);
    while (!work.empty()) {
        auto [loc, v] = std::move(work.front());
        work.pop_front();
        for (const Edge* e : out_edges[loc]) {
            EdgeTransfer t = transfer(view, *e, vars, v, tag, opts);
            if (t.dropped) continue;
            std::size_t to = *g.location_index(e->target);
            for (auto& p : t.posts) add(to, std::move(p));
        }
    }

    LocalDomain d;
    d.variables = vars;
    d.tag = tag;
    d.target = target;
    for (std::size_t l = 0; l < g.locations.size(); ++l) d.entries[g.locations[l].name] = std::move(dom[l]);
    return d;
}

LocalDomain approx_upper(const MasTemplate& m, const std::string& target, const std::vector<std::string>& vars,
                         const ApproxOptions& opts) {
    return approximate(m, target, vars, DomainTag::Upper, opts);
}

LocalDomain approx_lower(const MasTemplate& m, const std::string& target, const std::vector<std::string>& vars,
                         const ApproxOptions& opts) {
    return approximate(m, target, vars, DomainTag::Lower, opts);
}

} // namespace mabs
