#include "mabs/abstractor.hpp"

#include "mabs/error.hpp"
#include "mabs/parser.hpp"
#include "mabs/unfold.hpp"

#include <algorithm>
#include <set>

namespace mabs {

MappingFunction mapping_from_config(const Config& c) {
    MappingFunction f;
    f.target = c.target;
    f.scope = c.scope;
    f.remove = c.variables;
    f.merge = c.merge;
    return f;
}

namespace {

std::set<std::string> names_of(const Edge& e) {
    std::set<std::string> names = free_names(e.guard);
    for (const auto& u : e.updates) {
        names.insert(u.target);
        auto r = free_names(u.value);
        names.insert(r.begin(), r.end());
    }
    return names;
}

/// Resolves the scope to one flag per location of the target graph.
std::vector<bool> scope_flags(const TargetView& view, const std::vector<std::string>& scope) {
    const AgentGraph& g = view.graph;
    std::vector<bool> in(g.locations.size(), scope.empty());
    for (const auto& item : scope) {
        bool matched = false;
        if (auto l = g.location_index(item)) {
            in[*l] = matched = true;
        } else if (view.ext) {
            // `Instance.location` selects every tuple whose component is at that location.
            auto close = item.find(')');
            if (close != std::string::npos && close + 1 < item.size() && item[close + 1] == '.') {
                std::string inst = item.substr(0, close + 1);
                std::string loc = item.substr(close + 2);
                auto it = std::find(g.components.begin(), g.components.end(), inst);
                if (it != g.components.end()) {
                    auto k = static_cast<std::size_t>(it - g.components.begin());
                    for (std::size_t l = 0; l < g.locations.size(); ++l) {
                        std::string_view name = g.locations[l].name;
                        for (std::size_t s = 0; s < k; ++s) name.remove_prefix(name.find('.') + 1);
                        if (name.substr(0, name.find('.')) == loc) in[l] = matched = true;
                    }
                }
            }
        }
        if (!matched) throw SpecError("scope location '" + item + "' is not a location of " + view.target);
    }
    return in;
}

struct Processed {
    ExprPtr guard;
    std::vector<Update> updates;          // surviving updates, removed variables substituted
    std::vector<ExprPtr> retained_forms;  // value of each surviving update in pre-state terms
    std::vector<ExprPtr> conditions;      // removed updates stay within range
    std::map<std::string, ExprPtr> forms; // pre-state form of every variable written so far
    std::set<std::string> assigned;       // retained variables written so far
    bool wrote_removed = false;
};

class Abstractor {
public:
    Abstractor(const MasTemplate& m, const MappingFunction& f, const LocalDomain& d, const ApproxOptions& opts)
        : m_(m), f_(f), d_(d), opts_(opts), view_(make_target(m, f.target)) {}

    AbstractionResult run();

private:
    std::vector<ValueVector> project(const LocalDomain& d, const std::string& loc, bool required) const;
    Processed process(const Edge& e, const ValueVector& u) const;
    std::optional<Update> merge_update(const Processed& p, bool& front) const;
    void emit_variants(const Edge& x, std::vector<Edge>& out);
    void emit_must(const Edge& x, std::vector<Edge>& out);
    void emit_exiting(const Edge& x, std::vector<Edge>& out);
    Edge entering(const Edge& e) const;
    VarDecl merge_decl() const;
    bool is_private(const std::string& name) const;

    const MasTemplate& m_;
    const MappingFunction& f_;
    const LocalDomain& d_;
    const ApproxOptions& opts_;
    TargetView view_;
    std::vector<std::string> removed_;
    std::set<std::string> removed_set_;
    std::vector<bool> in_scope_;
    bool partial_ = false;
    bool must_ = false;
    ExprPtr merge_expr_;
    LocalDomain upper_;
    AbstractionResult result_;
};

std::vector<ValueVector> Abstractor::project(const LocalDomain& d, const std::string& loc, bool required) const {
    auto it = d.entries.find(loc);
    if (it == d.entries.end()) {
        if (required) throw SpecError("domain has no entry for location '" + loc + "'");
        return {};
    }
    std::vector<std::size_t> cols;
    for (const auto& r : removed_)
        cols.push_back(static_cast<std::size_t>(std::find(d.variables.begin(), d.variables.end(), r) -
                                                d.variables.begin()));
    std::set<ValueVector> out;
    for (const auto& v : it->second) {
        ValueVector p;
        for (auto c : cols) p.push_back(v[c]);
        out.insert(std::move(p));
    }
    return {out.begin(), out.end()};
}

Processed Abstractor::process(const Edge& e, const ValueVector& u) const {
    Processed p;
    for (std::size_t i = 0; i < removed_.size(); ++i) p.forms[removed_[i]] = lit(u[i]);
    auto pre = [&](const std::string& n) -> ExprPtr {
        auto it = p.forms.find(n);
        return it == p.forms.end() ? nullptr : it->second;
    };
    auto removed_form = [&](const std::string& n) -> ExprPtr {
        return removed_set_.count(n) ? p.forms.at(n) : nullptr;
    };
    p.guard = e.guard ? fold(substitute(e.guard, pre), view_.constants) : nullptr;
    for (const auto& upd : e.updates) {
        ExprPtr form = fold(substitute(upd.value, pre), view_.constants);
        if (removed_set_.count(upd.target)) {
            const VarDecl& d = view_.var(upd.target);
            p.conditions.push_back(fold(binary(BinaryOp::And, binary(BinaryOp::Le, lit(d.lo), form),
                                               binary(BinaryOp::Le, form, lit(d.hi)))));
            p.forms[upd.target] = form;
            p.wrote_removed = true;
            continue;
        }
        for (const auto& n : free_names(upd.value)) {
            if (!removed_set_.count(n)) continue;
            for (const auto& dep : free_names(p.forms.at(n)))
                if (p.assigned.count(dep))
                    throw UnsupportedFeature(describe(view_.target, e) + ": removed variable '" + n +
                                             "' is read after '" + dep + "', which it depends on, was reassigned");
        }
        p.updates.push_back({upd.target, fold(substitute(upd.value, removed_form), view_.constants)});
        p.retained_forms.push_back(form);
        p.forms[upd.target] = form;
        p.assigned.insert(upd.target);
    }
    return p;
}

std::optional<Update> Abstractor::merge_update(const Processed& p, bool& front) const {
    front = false;
    if (!f_.merge || !p.wrote_removed) return std::nullopt;
    ExprPtr value = fold(substitute(merge_expr_,
                                    [&](const std::string& n) -> ExprPtr {
                                        return removed_set_.count(n) ? p.forms.at(n) : nullptr;
                                    }),
                         view_.constants);
    // The form is over pre-state values; if a retained variable it reads was written on
    // this edge, evaluate it before the other updates.
    for (const auto& n : free_names(value))
        if (p.assigned.count(n)) front = true;
    return Update{f_.merge->name, value};
}

bool same_edge(const Edge& a, const Edge& b) {
    if (a.source != b.source || a.target != b.target || a.sync != b.sync || a.selects != b.selects) return false;
    if (!equal(a.guard, b.guard) || a.updates.size() != b.updates.size()) return false;
    for (std::size_t i = 0; i < a.updates.size(); ++i)
        if (a.updates[i].target != b.updates[i].target || !equal(a.updates[i].value, b.updates[i].value)) return false;
    return true;
}

void push_unique(std::vector<Edge>& out, std::size_t from, Edge e) {
    if (auto g = literal_value(e.guard)) {
        if (*g == 0) return;
        e.guard = nullptr;
    }
    for (std::size_t i = from; i < out.size(); ++i)
        if (same_edge(out[i], e)) return;
    out.push_back(std::move(e));
}

bool is_false(const ExprPtr& e) {
    auto v = literal_value(e);
    return v && *v == 0;
}

void Abstractor::emit_variants(const Edge& x, std::vector<Edge>& out) {
    std::size_t start = out.size();
    for (const auto& u : project(d_, x.source, true)) {
        Processed p = process(x, u);
        if (is_false(p.guard)) continue;
        if (std::any_of(p.conditions.begin(), p.conditions.end(), is_false)) continue;
        Edge v = x;
        v.guard = p.guard;
        v.updates = p.updates;
        bool front = false;
        if (auto mu = merge_update(p, front)) v.updates.insert(front ? v.updates.begin() : v.updates.end(), *mu);
        push_unique(out, start, std::move(v));
    }
}

void Abstractor::emit_must(const Edge& x, std::vector<Edge>& out) {
    auto vectors = project(upper_, x.source, false);
    if (vectors.empty()) return;
    std::vector<Processed> ps;
    for (const auto& w : vectors) ps.push_back(process(x, w));
    const Processed& p0 = ps.front();
    ExprPtr guard;
    ExprPtr derived;
    bool front = false;
    auto m0 = merge_update(p0, front);
    for (const auto& p : ps) {
        guard = conjoin(guard, p.guard);
        for (const auto& c : p.conditions) derived = conjoin(derived, c);
        if (&p == &p0) continue;
        for (std::size_t k = 0; k < p.retained_forms.size(); ++k)
            if (!equal(p.retained_forms[k], p0.retained_forms[k]))
                derived = conjoin(derived, fold(binary(BinaryOp::Eq, p.retained_forms[k], p0.retained_forms[k])));
        bool ignored = false;
        auto mp = merge_update(p, ignored);
        if (m0 && mp && !equal(mp->value, m0->value))
            derived = conjoin(derived, fold(binary(BinaryOp::Eq, mp->value, m0->value)));
    }
    guard = fold(conjoin(guard, derived));
    if (is_false(guard)) return;
    if (x.sync && x.sync->dir == SyncDir::Receive && derived) {
        // Conditions derived from the updates are evaluated before the sender's updates run.
        for (const auto& n : free_names(derived)) {
            if (!is_private(n)) {
                result_.warnings.push_back(describe(view_.target, x) + ": must edge dropped, its effect depends on '" +
                                           n + "' which the sender may change");
                return;
            }
        }
    }
    Edge v = x;
    v.guard = guard;
    v.updates = p0.updates;
    if (m0) v.updates.insert(front ? v.updates.begin() : v.updates.end(), *m0);
    push_unique(out, out.size(), std::move(v));
}

void Abstractor::emit_exiting(const Edge& x, std::vector<Edge>& out) {
    std::size_t start = out.size();
    auto targets = project(d_, x.target, true);
    for (const auto& u : project(d_, x.source, true)) {
        Processed p = process(x, u);
        if (is_false(p.guard)) continue;
        if (std::any_of(p.conditions.begin(), p.conditions.end(), is_false)) continue;
        for (const auto& w : targets) {
            Edge v = x;
            v.guard = p.guard;
            v.updates = p.updates;
            for (std::size_t i = 0; i < removed_.size(); ++i) v.updates.push_back({removed_[i], lit(w[i])});
            if (f_.merge) v.updates.push_back({f_.merge->name, lit(f_.merge->initial)});
            push_unique(out, start, std::move(v));
        }
    }
}

Edge Abstractor::entering(const Edge& e) const {
    Edge v = e;
    if (f_.merge) v.updates.push_back({f_.merge->name, merge_expr_});
    for (const auto& r : removed_) v.updates.push_back({r, lit(view_.var(r).initial)});
    return v;
}

bool Abstractor::is_private(const std::string& name) const {
    return name == "id" || view_.graph.find_private(name) != nullptr;
}

VarDecl Abstractor::merge_decl() const {
    const MergeSpec& ms = *f_.merge;
    VarDecl d{ms.name, ms.initial, ms.initial, ms.initial, VarKind::Private};
    auto widen = [&](const ValueVector& v) {
        MapEnv env;
        for (const auto& [n, x] : view_.constants) env.values[n] = x;
        for (std::size_t i = 0; i < removed_.size(); ++i) env.values[removed_[i]] = v[i];
        try {
            int x = eval(*merge_expr_, env);
            d.lo = std::min(d.lo, x);
            d.hi = std::max(d.hi, x);
        } catch (const EvalError&) {
        }
    };
    ValueVector init;
    for (const auto& r : removed_) init.push_back(view_.var(r).initial);
    widen(init);
    for (const auto& [loc, _] : d_.entries)
        for (const auto& v : project(d_, loc, false)) widen(v);
    for (const auto& [loc, _] : upper_.entries)
        for (const auto& v : project(upper_, loc, false)) widen(v);
    return d;
}

AbstractionResult Abstractor::run() {
    if (d_.tag == DomainTag::Exact) throw SpecError("domain must be tagged upper or lower");
    must_ = d_.tag == DomainTag::Lower;
    removed_ = f_.remove;
    removed_set_ = {removed_.begin(), removed_.end()};
    check_target_variables(m_, view_, removed_);
    for (const auto& r : removed_)
        if (std::find(d_.variables.begin(), d_.variables.end(), r) == d_.variables.end())
            throw SpecError("domain does not cover removed variable '" + r + "'");
    if (!d_.target.empty() && d_.target != f_.target)
        result_.warnings.push_back("domain was computed for target '" + d_.target + "', not '" + f_.target + "'");

    in_scope_ = scope_flags(view_, f_.scope);
    partial_ = std::find(in_scope_.begin(), in_scope_.end(), false) != in_scope_.end();
    const AgentGraph& g = view_.graph;
    for (std::size_t l = 0; l < g.locations.size(); ++l)
        if (in_scope_[l]) project(d_, g.locations[l].name, true);

    if (f_.merge) {
        merge_expr_ = fold(parse_expr(f_.merge->expr), view_.constants);
        for (const auto& n : free_names(merge_expr_))
            if (!removed_set_.count(n))
                throw SpecError("merge expression reads '" + n + "', which is not a removed variable");
        if (view_.vars.count(f_.merge->name) || view_.constants.count(f_.merge->name))
            throw SpecError("merge variable '" + f_.merge->name + "' is already declared");
        MapEnv env;
        for (const auto& r : removed_) env.values[r] = view_.var(r).initial;
        try {
            if (eval(*merge_expr_, env) != f_.merge->initial)
                result_.warnings.push_back("merge initial value differs from the merge expression at the initial values");
        } catch (const EvalError&) {
        }
    }
    if (must_) {
        upper_ = approx_upper(m_, f_.target, removed_, opts_);
        for (std::size_t l = 0; l < g.locations.size(); ++l) {
            if (!in_scope_[l]) continue;
            auto lower = project(d_, g.locations[l].name, true);
            auto up = project(upper_, g.locations[l].name, false);
            if (!std::includes(up.begin(), up.end(), lower.begin(), lower.end()))
                result_.warnings.push_back("lower domain at '" + g.locations[l].name +
                                           "' has vectors outside the upper approximation");
        }
    }

    // Original edges, each with its select-expanded, constant-folded instances.
    std::vector<std::pair<Edge, std::vector<Edge>>> edges;
    if (view_.ext) {
        for (const auto& e : g.edges) edges.push_back({e, {e}});
    } else {
        for (const auto& e : m_.find_template(f_.target)->graph.edges) {
            std::vector<Edge> xs;
            for (auto& x : expand_selects(e)) {
                if (x.guard) x.guard = fold(x.guard, view_.constants);
                if (auto v = literal_value(x.guard); v && *v != 0) x.guard = nullptr;
                for (auto& u : x.updates) u.value = fold(u.value, view_.constants);
                xs.push_back(std::move(x));
            }
            edges.push_back({e, std::move(xs)});
        }
    }

    std::vector<Edge> out;
    for (const auto& [orig, expanded] : edges) {
        bool src_in = in_scope_[*g.location_index(orig.source)];
        bool tgt_in = in_scope_[*g.location_index(orig.target)];
        auto names = names_of(orig);
        bool mentions = std::any_of(removed_.begin(), removed_.end(), [&](const auto& r) { return names.count(r); });
        if (!src_in && !tgt_in) {
            out.push_back(orig);
        } else if (!src_in) {
            out.push_back(entering(orig));
        } else if (!tgt_in) {
            if (must_) {
                result_.needs_confirmation.push_back({orig.source, orig.target, false, describe(view_.target, orig)});
                result_.warnings.push_back(describe(view_.target, orig) +
                                           ": scope-exiting edge dropped from the must-abstraction, needs confirmation");
            } else {
                for (const auto& x : expanded) emit_exiting(x, out);
            }
        } else if (!mentions) {
            out.push_back(orig);
        } else {
            for (const auto& x : expanded) must_ ? emit_must(x, out) : emit_variants(x, out);
        }
    }

    AbstractionResult& r = result_;
    if (view_.ext) {
        CombinedGraph c = combine(m_);
        c.graph.edges = std::move(out);
        if (!partial_)
            std::erase_if(c.variables, [&](const VarDecl& v) { return removed_set_.count(v.name) > 0; });
        if (f_.merge) {
            VarDecl md = merge_decl();
            md.kind = VarKind::Global;
            c.variables.push_back(md);
        }
        r.model = to_model(c);
    } else {
        r.model = m_;
        AgentGraph& t = r.model.find_template(f_.target)->graph;
        t.edges = std::move(out);
        bool all_private = true;
        for (const auto& name : removed_) all_private = all_private && t.find_private(name);
        if (!partial_) {
            std::erase_if(t.privates, [&](const VarDecl& v) { return removed_set_.count(v.name) > 0; });
            std::erase_if(r.model.globals, [&](const VarDecl& v) { return removed_set_.count(v.name) > 0; });
        }
        if (f_.merge) {
            VarDecl md = merge_decl();
            if (all_private) {
                t.privates.push_back(md);
            } else {
                md.kind = VarKind::Global;
                r.model.globals.push_back(md);
            }
        }
    }
    validate(r.model);
    return std::move(result_);
}

} // namespace

std::vector<BoundaryEdge> check_scope_boundary(const MasTemplate& m, const MappingFunction& f) {
    TargetView view = make_target(m, f.target);
    auto in = scope_flags(view, f.scope);
    std::vector<BoundaryEdge> out;
    const AgentGraph& g = view.ext ? view.graph : m.find_template(f.target)->graph;
    for (const auto& e : g.edges) {
        bool s = in[*g.location_index(e.source)];
        bool t = in[*g.location_index(e.target)];
        if (s != t) out.push_back({e.source, e.target, t, describe(view.target, e)});
    }
    return out;
}

AbstractionResult abstract(const MasTemplate& m, const MappingFunction& f, const LocalDomain& d,
                           const ApproxOptions& opts) {
    return Abstractor(m, f, d, opts).run();
}

} // namespace mabs
