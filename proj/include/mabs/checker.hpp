#pragma once

#include "mabs/domain.hpp"
#include "mabs/parser.hpp"
#include "mabs/system.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mabs {

struct ExploreOptions {
    std::uint64_t state_cap = 50'000'000;
    unsigned threads = 1;
};

struct ExploreStats {
    std::uint64_t states = 0;
    std::uint64_t transitions = 0;  // successors generated, duplicates included
    std::uint64_t peak_frontier = 0;
    bool complete = true;           // false when the state cap stopped exploration
    double time_ms = 0;
};

/// A global state in decoded form.
struct GlobalState {
    std::vector<int> locations;  // per process
    std::vector<int> values;     // per System::vars slot
    bool operator==(const GlobalState&) const = default;
};

struct TraceStep {
    std::string label;  // edge(s) taken to reach `state`; empty for the initial state
    GlobalState state;
};

enum class Verdict : std::uint8_t { Holds, Fails, Inconclusive };
std::string_view to_string(Verdict v);

struct CheckResult {
    Verdict verdict = Verdict::Inconclusive;
    /// Counterexample for a failing A[] p, witness for a holding E<> p.
    std::vector<TraceStep> trace;
    ExploreStats stats;
};

/// Which edges fired: process/edge of the active side and, for a handshake, of the receiver.
struct Step {
    int proc = -1;
    int edge = -1;
    int partner = -1;
    int partner_edge = -1;
};

GlobalState initial_state(const System& sys);

/// Successors in canonical order: process ascending, edges in declaration order, for a send
/// the receiving process ascending and its receive edges in order. An update leaving the
/// target's range disables the transition. Evaluation errors propagate as EvalError.
std::vector<std::pair<Step, GlobalState>> successors(const System& sys, const GlobalState& s);
std::string describe(const System& sys, const Step& step);
std::string describe(const System& sys, const GlobalState& s);

ExploreStats explore(const System& sys, const ExploreOptions& opts = {});
CheckResult check(const System& sys, const Query& q, const ExploreOptions& opts = {});

/// Full reachable state graph, states in BFS order. Throws ResourceError past the cap.
struct GlobalModel {
    std::vector<GlobalState> states;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> transitions;
};
GlobalModel build_global_model(const System& sys, std::uint64_t state_cap = 1'000'000);

/// Exact projection of the reachable states onto `variables`, per location of `target`.
/// For a template name the entries are the union over its instances (`id` may appear in
/// `variables`); for "ext" locations are the dot-joined location tuples.
/// Throws ResourceError past the cap.
LocalDomain project_reachable(const System& sys, const std::string& target, const std::vector<std::string>& variables,
                              std::uint64_t state_cap = 1'000'000);

} // namespace mabs
