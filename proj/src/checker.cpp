#include "mabs/checker.hpp"

#include "mabs/error.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <exception>
#include <thread>

namespace mabs {

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

GlobalState initial_state(const System& sys) {
    GlobalState s;
    for (const auto& p : sys.procs) s.locations.push_back(p.initial);
    for (const auto& v : sys.vars) s.values.push_back(v.initial);
    return s;
}

namespace {

bool apply(const System& sys, const CompiledEdge& e, std::vector<int>& nv, std::span<const int> locs) {
    for (const auto& [slot, prog] : e.updates) {
        int x = prog.run(nv, locs);
        const VarDecl& d = sys.vars[slot];
        if (x < d.lo || x > d.hi) return false;
        nv[slot] = x;
    }
    return true;
}

/// Calls f(step, locations, values) for each successor in canonical order.
template <class F>
void expand(const System& sys, std::span<const int> locs, std::span<const int> vals, std::vector<int>& nl,
            std::vector<int>& nv, F&& f) {
    for (std::size_t i = 0; i < sys.procs.size(); ++i) {
        const Process& p = sys.procs[i];
        for (int ei : p.active[locs[i]]) {
            const CompiledEdge& e = p.edges[ei];
            if (!e.guard.empty() && e.guard.run(vals, locs) == 0) continue;
            if (e.channel < 0) {
                nv.assign(vals.begin(), vals.end());
                if (!apply(sys, e, nv, locs)) continue;
                nl.assign(locs.begin(), locs.end());
                nl[i] = e.target;
                f(Step{static_cast<int>(i), ei, -1, -1}, nl, nv);
                continue;
            }
            for (std::size_t j = 0; j < sys.procs.size(); ++j) {
                if (j == i) continue;
                const Process& q = sys.procs[j];
                for (int fi : q.receives[e.channel][locs[j]]) {
                    const CompiledEdge& r = q.edges[fi];
                    if (!r.guard.empty() && r.guard.run(vals, locs) == 0) continue;
                    nv.assign(vals.begin(), vals.end());
                    if (!apply(sys, e, nv, locs) || !apply(sys, r, nv, locs)) continue;
                    nl.assign(locs.begin(), locs.end());
                    nl[i] = e.target;
                    nl[j] = r.target;
                    f(Step{static_cast<int>(i), ei, static_cast<int>(j), fi}, nl, nv);
                }
            }
        }
    }
}

inline std::uint64_t hash_bytes(const std::uint8_t* p, std::size_t n) {
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ n;
    while (n >= 8) {
        std::uint64_t w;
        std::memcpy(&w, p, 8);
        h = (h ^ w) * 0xBF58476D1CE4E5B9ull;
        h ^= h >> 31;
        p += 8;
        n -= 8;
    }
    if (n) {
        std::uint64_t w = 0;
        std::memcpy(&w, p, n);
        h = (h ^ w) * 0xBF58476D1CE4E5B9ull;
    }
    h ^= h >> 30;
    h *= 0x94D049BB133111EBull;
    h ^= h >> 31;
    return h;
}

/// Deduplicating store of packed states. States are numbered in insertion order, which is
/// BFS order, so the frontier of each level is a contiguous index range.
class StateStore {
public:
    explicit StateStore(std::size_t stride) : stride_(stride) { table_.assign(1u << 12, 0); }

    std::size_t size() const { return parents_.size(); }
    std::size_t stride() const { return stride_; }
    const std::uint8_t* state(std::size_t i) const { return arena_.data() + i * stride_; }
    std::uint32_t parent(std::size_t i) const { return parents_[i]; }

    /// Returns the index of the state and whether it was new.
    std::pair<std::uint32_t, bool> insert(const std::uint8_t* s, std::uint64_t h, std::uint32_t parent) {
        std::uint64_t mask = table_.size() - 1;
        std::uint64_t tag = h >> 32;
        for (std::uint64_t pos = h & mask;; pos = (pos + 1) & mask) {
            std::uint64_t slot = table_[pos];
            if (slot == 0) {
                auto idx = static_cast<std::uint32_t>(parents_.size());
                table_[pos] = (tag << 32) | (static_cast<std::uint64_t>(idx) + 1);
                if (arena_.size() + stride_ > arena_.capacity()) arena_.reserve(arena_.capacity() * 3 / 2 + 4096);
                arena_.insert(arena_.end(), s, s + stride_);
                parents_.push_back(parent);
                if (parents_.size() * 10 > table_.size() * 6) grow();
                return {idx, true};
            }
            if ((slot >> 32) == tag) {
                auto idx = static_cast<std::uint32_t>((slot & 0xFFFFFFFFull) - 1);
                if (std::memcmp(state(idx), s, stride_) == 0) return {idx, false};
            }
        }
    }

    bool contains(const std::uint8_t* s, std::uint64_t h) const {
        std::uint64_t mask = table_.size() - 1;
        for (std::uint64_t pos = h & mask;; pos = (pos + 1) & mask) {
            std::uint64_t slot = table_[pos];
            if (slot == 0) return false;
            if ((slot >> 32) == (h >> 32) &&
                std::memcmp(state(static_cast<std::uint32_t>((slot & 0xFFFFFFFFull) - 1)), s, stride_) == 0)
                return true;
        }
    }

    std::size_t bytes() const {
        return arena_.capacity() + parents_.capacity() * sizeof(std::uint32_t) + table_.size() * sizeof(std::uint64_t);
    }

private:
    void grow() {
        std::vector<std::uint64_t> old(table_.size() * 2, 0);
        old.swap(table_);
        std::uint64_t mask = table_.size() - 1;
        for (std::size_t i = 0; i < parents_.size(); ++i) {
            std::uint64_t h = hash_bytes(state(i), stride_);
            std::uint64_t pos = h & mask;
            while (table_[pos] != 0) pos = (pos + 1) & mask;
            table_[pos] = ((h >> 32) << 32) | (i + 1);
        }
    }

    std::size_t stride_;
    std::vector<std::uint8_t> arena_;
    std::vector<std::uint32_t> parents_;
    std::vector<std::uint64_t> table_;
};

constexpr std::uint32_t kNoParent = 0xFFFFFFFFu;

/// Successors produced by one worker for a slice of the frontier.
struct Batch {
    std::vector<std::uint8_t> bytes;
    std::vector<std::uint64_t> hashes;
    std::vector<std::uint32_t> parents;
    std::vector<std::uint8_t> flags;  // proposition value, when checking
    std::exception_ptr error;
    void clear() {
        bytes.clear();
        hashes.clear();
        parents.clear();
        flags.clear();
        error = nullptr;
    }
};

struct SearchResult {
    ExploreStats stats;
    std::uint32_t hit = kNoParent;  // first state whose proposition value equals the target
};

/// Level-synchronous BFS. Successors are generated in parallel and inserted sequentially
/// in canonical order, so indices, counts and traces do not depend on the thread count.
SearchResult search(const System& sys, const ExploreOptions& opts, StateStore& store, const Program* prop,
                    bool stop_value) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    StateCodec codec(sys);
    SearchResult res;
    const std::size_t np = sys.procs.size();
    const std::size_t nvars = sys.vars.size();
    const unsigned threads = std::max(1u, opts.threads);

    GlobalState init = initial_state(sys);
    std::vector<std::uint8_t> buf(codec.size());
    codec.encode(init.locations, init.values, buf.data());
    if (opts.state_cap == 0) {
        res.stats.complete = false;
        return res;
    }
    store.insert(buf.data(), hash_bytes(buf.data(), buf.size()), kNoParent);
    if (prop && (prop->run(init.values, init.locations) != 0) == stop_value) {
        res.hit = 0;
        res.stats.states = 1;
        res.stats.peak_frontier = 1;
        res.stats.time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        return res;
    }

    auto work = [&](std::size_t from, std::size_t to, Batch& out) {
        try {
            std::vector<int> locs(np), vals(nvars), nl, nv;
            std::vector<std::uint8_t> enc(codec.size());
            for (std::size_t s = from; s < to; ++s) {
                codec.decode(store.state(s), locs, vals);
                expand(sys, locs, vals, nl, nv, [&](const Step&, const std::vector<int>& l, const std::vector<int>& v) {
                    codec.encode(l, v, enc.data());
                    out.bytes.insert(out.bytes.end(), enc.begin(), enc.end());
                    out.hashes.push_back(hash_bytes(enc.data(), enc.size()));
                    out.parents.push_back(static_cast<std::uint32_t>(s));
                    if (prop) out.flags.push_back(prop->run(v, l) != 0);
                });
            }
        } catch (...) {
            out.error = std::current_exception();
        }
    };

    std::vector<Batch> batches(threads);
    const std::size_t batch_states = 8192 * threads;
    std::size_t level_begin = 0;
    std::size_t level_end = 1;
    bool stop = false;
    while (level_begin < level_end && !stop) {
        res.stats.peak_frontier = std::max<std::uint64_t>(res.stats.peak_frontier, level_end - level_begin);
        for (std::size_t b = level_begin; b < level_end && !stop; b += batch_states) {
            std::size_t e = std::min(level_end, b + batch_states);
            std::size_t chunk = (e - b + threads - 1) / threads;
            for (auto& x : batches) x.clear();
            if (threads == 1 || e - b < 64) {
                work(b, e, batches[0]);
            } else {
                std::vector<std::thread> pool;
                for (unsigned t = 0; t < threads; ++t) {
                    std::size_t lo = std::min(e, b + t * chunk), hi = std::min(e, lo + chunk);
                    if (lo < hi) pool.emplace_back(work, lo, hi, std::ref(batches[t]));
                }
                for (auto& th : pool) th.join();
            }
            for (auto& x : batches) {
                if (x.error) std::rethrow_exception(x.error);
                for (std::size_t k = 0; k < x.parents.size(); ++k) {
                    ++res.stats.transitions;
                    const std::uint8_t* s = x.bytes.data() + k * store.stride();
                    if (store.size() >= opts.state_cap) {
                        if (store.contains(s, x.hashes[k])) continue;
                        res.stats.complete = false;
                        stop = true;
                        break;
                    }
                    auto [idx, fresh] = store.insert(s, x.hashes[k], x.parents[k]);
                    if (fresh && prop && (x.flags[k] != 0) == stop_value) {
                        res.hit = idx;
                        stop = true;
                        break;
                    }
                }
                if (stop) break;
            }
        }
        level_begin = level_end;
        level_end = store.size();
    }
    res.stats.states = store.size();
    res.stats.time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    return res;
}

} // namespace

std::vector<std::pair<Step, GlobalState>> successors(const System& sys, const GlobalState& s) {
    std::vector<std::pair<Step, GlobalState>> out;
    std::vector<int> nl, nv;
    expand(sys, s.locations, s.values, nl, nv, [&](const Step& st, const std::vector<int>& l, const std::vector<int>& v) {
        out.push_back({st, GlobalState{l, v}});
    });
    return out;
}

std::string describe(const System& sys, const Step& step) {
    std::string s = sys.procs[step.proc].edges[step.edge].label;
    if (step.partner >= 0) s += " || " + sys.procs[step.partner].edges[step.partner_edge].label;
    return s;
}

std::string describe(const System& sys, const GlobalState& s) {
    std::string out = "(" + sys.location_name(s.locations) + ")";
    for (std::size_t i = 0; i < sys.vars.size(); ++i) out += " " + sys.vars[i].name + "=" + std::to_string(s.values[i]);
    return out;
}

ExploreStats explore(const System& sys, const ExploreOptions& opts) {
    StateStore store(StateCodec(sys).size());
    return search(sys, opts, store, nullptr, false).stats;
}

CheckResult check(const System& sys, const Query& q, const ExploreOptions& opts) {
    Program prop = sys.compile(q.proposition);
    bool invariant = q.kind == Query::Kind::Invariant;
    StateCodec codec(sys);
    StateStore store(codec.size());
    SearchResult sr = search(sys, opts, store, prop.empty() ? nullptr : &prop, !invariant);
    CheckResult res;
    res.stats = sr.stats;
    if (prop.empty() && !invariant) sr.hit = 0;  // E<> true
    if (sr.hit == kNoParent) {
        res.verdict = !res.stats.complete ? Verdict::Inconclusive : invariant ? Verdict::Holds : Verdict::Fails;
        return res;
    }
    res.verdict = invariant ? Verdict::Fails : Verdict::Holds;

    std::vector<std::uint32_t> path;
    for (std::uint32_t i = sr.hit; i != kNoParent; i = store.parent(i)) path.push_back(i);
    std::reverse(path.begin(), path.end());
    auto decode = [&](std::uint32_t i) {
        GlobalState g;
        g.locations.resize(sys.procs.size());
        g.values.resize(sys.vars.size());
        codec.decode(store.state(i), g.locations, g.values);
        return g;
    };
    res.trace.push_back({"", decode(path[0])});
    for (std::size_t k = 1; k < path.size(); ++k) {
        GlobalState next = decode(path[k]);
        for (auto& [step, succ] : successors(sys, res.trace.back().state)) {
            if (succ == next) {
                res.trace.push_back({describe(sys, step), std::move(next)});
                break;
            }
        }
    }
    return res;
}

GlobalModel build_global_model(const System& sys, std::uint64_t state_cap) {
    StateCodec codec(sys);
    StateStore store(codec.size());
    GlobalModel gm;
    std::vector<std::uint8_t> enc(codec.size());
    auto add = [&](const GlobalState& g, std::uint32_t parent) {
        codec.encode(g.locations, g.values, enc.data());
        auto [idx, fresh] = store.insert(enc.data(), hash_bytes(enc.data(), enc.size()), parent);
        if (fresh) {
            if (gm.states.size() >= state_cap) throw ResourceError("state cap exceeded while building the global model");
            gm.states.push_back(g);
        }
        return idx;
    };
    add(initial_state(sys), kNoParent);
    for (std::size_t i = 0; i < gm.states.size(); ++i) {
        GlobalState cur = gm.states[i];
        for (auto& [step, succ] : successors(sys, cur)) {
            auto j = add(succ, static_cast<std::uint32_t>(i));
            gm.transitions.push_back({static_cast<std::uint32_t>(i), j});
        }
    }
    return gm;
}

LocalDomain project_reachable(const System& sys, const std::string& target, const std::vector<std::string>& variables,
                              std::uint64_t state_cap) {
    StateCodec codec(sys);
    StateStore store(codec.size());
    ExploreOptions opts;
    opts.state_cap = state_cap;
    SearchResult sr = search(sys, opts, store, nullptr, false);
    if (!sr.stats.complete) throw ResourceError("state cap exceeded while projecting reachable states");

    LocalDomain d;
    d.variables = variables;
    d.tag = DomainTag::Exact;
    d.target = target;

    // One projection per process of the target: (process, slots), slot -1 meaning `id`.
    struct View {
        std::size_t proc;
        int id;
        std::vector<int> slots;
    };
    std::vector<View> views;
    bool ext = target == kExtTarget;
    if (ext) {
        View v{0, 0, {}};
        for (const auto& name : variables) {
            auto s = sys.slot(name);
            if (!s) throw SpecError("unknown variable '" + name + "'");
            v.slots.push_back(*s);
        }
        views.push_back(std::move(v));
        if (sys.procs.size() == 1)
            for (const auto& l : sys.procs[0].locations) d.entries[l];
    } else {
        for (std::size_t p = 0; p < sys.procs.size(); ++p) {
            const Process& proc = sys.procs[p];
            if (proc.template_name != target) continue;
            int id = static_cast<int>(std::count_if(sys.procs.begin(), sys.procs.begin() + static_cast<long>(p),
                                                    [&](const Process& q) { return q.template_name == target; })) +
                     1;
            View v{p, id, {}};
            for (const auto& name : variables) {
                if (name == "id") {
                    v.slots.push_back(-1);
                } else if (auto s = sys.slot(proc.name + "." + name)) {
                    v.slots.push_back(*s);
                } else if (auto g = sys.slot(name)) {
                    v.slots.push_back(*g);
                } else {
                    throw SpecError("unknown variable '" + name + "' in template " + target);
                }
            }
            views.push_back(std::move(v));
            for (const auto& l : proc.locations) d.entries[l];
        }
        if (views.empty()) throw SpecError("unknown template '" + target + "'");
    }

    GlobalState g;
    g.locations.resize(sys.procs.size());
    g.values.resize(sys.vars.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        codec.decode(store.state(i), g.locations, g.values);
        for (const auto& v : views) {
            ValueVector vec;
            for (int s : v.slots) vec.push_back(s < 0 ? v.id : g.values[s]);
            std::string loc = ext ? sys.location_name(g.locations) : sys.procs[v.proc].locations[g.locations[v.proc]];
            d.entries[loc].insert(std::move(vec));
        }
    }
    return d;
}

} // namespace mabs
