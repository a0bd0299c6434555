#include "mabs/model.hpp"

#include "mabs/error.hpp"

#include <algorithm>
#include <set>

namespace mabs {

std::optional<std::size_t> AgentGraph::location_index(std::string_view loc) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
        if (locations[i].name == loc) return i;
    return std::nullopt;
}

const VarDecl* AgentGraph::find_private(std::string_view var) const {
    for (const auto& v : privates)
        if (v.name == var) return &v;
    return nullptr;
}

const TemplateEntry* MasTemplate::find_template(std::string_view name) const {
    for (const auto& t : templates)
        if (t.graph.name == name) return &t;
    return nullptr;
}

TemplateEntry* MasTemplate::find_template(std::string_view name) {
    for (auto& t : templates)
        if (t.graph.name == name) return &t;
    return nullptr;
}

const VarDecl* MasTemplate::find_global(std::string_view var) const {
    for (const auto& v : globals)
        if (v.name == var) return &v;
    return nullptr;
}

std::map<std::string, int> MasTemplate::constant_map() const {
    return {constants.begin(), constants.end()};
}

bool operator==(const Update& a, const Update& b) { return a.target == b.target && equal(a.value, b.value); }

bool operator==(const Edge& a, const Edge& b) {
    return a.source == b.source && a.target == b.target && a.selects == b.selects && equal(a.guard, b.guard) &&
           a.sync == b.sync && a.updates == b.updates;
}

bool operator==(const AgentGraph& a, const AgentGraph& b) {
    return a.name == b.name && a.locations == b.locations && a.initial == b.initial && a.privates == b.privates &&
           a.constants == b.constants && a.edges == b.edges && a.components == b.components;
}

bool operator==(const TemplateEntry& a, const TemplateEntry& b) { return a.count == b.count && a.graph == b.graph; }

bool operator==(const MasTemplate& a, const MasTemplate& b) {
    return a.constants == b.constants && a.globals == b.globals && a.channels == b.channels &&
           a.templates == b.templates;
}

std::string instance_name(std::string_view template_name, int k) {
    return std::string(template_name) + "(" + std::to_string(k) + ")";
}

std::string describe(const std::string& owner, const Edge& e) {
    std::string s = owner + ": " + e.source + " -> " + e.target;
    if (e.sync) s += " [" + e.sync->channel + (e.sync->dir == SyncDir::Send ? "!]" : "?]");
    return s;
}

std::vector<Edge> expand_selects(const Edge& e) {
    if (e.selects.empty()) return {e};
    for (const auto& s : e.selects)
        if (s.lo > s.hi)
            throw SpecError("empty select range " + s.name + ":int[" + std::to_string(s.lo) + "," +
                            std::to_string(s.hi) + "] on edge " + e.source + " -> " + e.target);

    std::vector<Edge> out;
    std::vector<int> values;
    for (const auto& s : e.selects) values.push_back(s.lo);
    while (true) {
        std::map<std::string, ExprPtr> binding;
        for (std::size_t i = 0; i < values.size(); ++i) binding[e.selects[i].name] = lit(values[i]);
        Edge x;
        x.source = e.source;
        x.target = e.target;
        x.guard = e.guard ? substitute(e.guard, binding) : nullptr;
        x.sync = e.sync;
        for (const auto& u : e.updates) x.updates.push_back({u.target, substitute(u.value, binding)});
        out.push_back(std::move(x));

        // Odometer increment, last select fastest.
        std::size_t i = values.size();
        while (i > 0) {
            --i;
            if (values[i] < e.selects[i].hi) {
                ++values[i];
                break;
            }
            values[i] = e.selects[i].lo;
            if (i == 0) return out;
        }
    }
}

namespace {

void check_decl(const VarDecl& v, const std::string& scope) {
    if (v.lo < kIntMin || v.hi > kIntMax)
        throw SpecError(scope + ": variable '" + v.name + "' range exceeds 16 bits");
    if (v.lo > v.hi) throw SpecError(scope + ": variable '" + v.name + "' has empty range");
    if (!v.contains(v.initial))
        throw SpecError(scope + ": initial value of '" + v.name + "' outside [" + std::to_string(v.lo) + "," +
                        std::to_string(v.hi) + "]");
}

void check_names(const ExprPtr& e, const std::set<std::string>& visible, const std::string& where) {
    for (const auto& n : free_names(e))
        if (!visible.count(n)) throw SpecError(where + ": unknown name '" + n + "'");
}

} // namespace

void validate(const MasTemplate& m) {
    std::set<std::string> global_names;
    auto claim = [&](std::set<std::string>& names, const std::string& n, const std::string& scope) {
        if (!names.insert(n).second) throw SpecError(scope + ": duplicate name '" + n + "'");
    };
    for (const auto& [n, v] : m.constants) claim(global_names, n, "global declarations");
    for (const auto& c : m.channels) claim(global_names, c, "global declarations");
    for (const auto& v : m.globals) {
        check_decl(v, "global declarations");
        claim(global_names, v.name, "global declarations");
    }
    std::set<std::string> channels(m.channels.begin(), m.channels.end());

    std::set<std::string> template_names;
    for (const auto& entry : m.templates) {
        const auto& g = entry.graph;
        const std::string scope = "template " + g.name;
        if (!template_names.insert(g.name).second) throw SpecError("duplicate template '" + g.name + "'");
        if (entry.count < 1) throw SpecError(scope + ": instance count must be at least 1");
        if (g.locations.empty()) throw SpecError(scope + ": no locations");

        std::set<std::string> locs;
        for (const auto& l : g.locations)
            if (!locs.insert(l.name).second) throw SpecError(scope + ": duplicate location '" + l.name + "'");
        if (!locs.count(g.initial)) throw SpecError(scope + ": initial location '" + g.initial + "' not declared");

        std::set<std::string> names = global_names;
        std::set<std::string> assignable;
        for (const auto& v : m.globals) assignable.insert(v.name);
        names.insert("id");
        for (const auto& [n, v] : g.constants) claim(names, n, scope);
        for (const auto& v : g.privates) {
            check_decl(v, scope);
            claim(names, v.name, scope);
            assignable.insert(v.name);
        }

        for (const auto& e : g.edges) {
            const std::string where = describe(g.name, e);
            if (!locs.count(e.source) || !locs.count(e.target))
                throw SpecError(where + ": edge endpoint is not a location of the template");
            std::set<std::string> visible = names;
            std::set<std::string> selects;
            for (const auto& s : e.selects) {
                if (s.lo > s.hi) throw SpecError(where + ": empty select range for '" + s.name + "'");
                if (names.count(s.name)) throw SpecError(where + ": select '" + s.name + "' shadows a declaration");
                if (!selects.insert(s.name).second) throw SpecError(where + ": duplicate select '" + s.name + "'");
                visible.insert(s.name);
            }
            check_names(e.guard, visible, where);
            if (e.sync && !channels.count(e.sync->channel))
                throw SpecError(where + ": unknown channel '" + e.sync->channel + "'");
            for (const auto& u : e.updates) {
                if (!assignable.count(u.target))
                    throw SpecError(where + ": update target '" + u.target + "' is not a visible variable");
                check_names(u.value, visible, where);
            }
        }
    }
}

} // namespace mabs
