#pragma once

#include "mabs/model.hpp"

#include <string>
#include <vector>

namespace mabs {

/// One agent graph per template instance, named `Name(k)`. Privates are renamed to
/// `Name(k).var`, `id` is replaced by k, constants are folded and selects expanded.
std::vector<AgentGraph> instantiate(const MasTemplate& m);

/// The asynchronous product of a list of agents. Locations are dot-joined tuples of the
/// component locations; all synchronisation is resolved, so no edge carries a sync label.
struct CombinedGraph {
    AgentGraph graph;
    std::vector<VarDecl> variables;  // globals followed by every instance's privates
    std::vector<std::pair<std::string, int>> constants;
    std::vector<std::string> warnings;
};

/// Only combined locations reachable through the edge structure (guards ignored) are
/// kept. Synchronising edges pair a send `c!` of agent i with a receive `c?` of agent
/// j != i; the joint guard is the conjunction and the sender's updates run first.
CombinedGraph combine(const std::vector<AgentGraph>& agents, const std::vector<VarDecl>& globals);
CombinedGraph combine(const MasTemplate& m);

inline constexpr std::string_view kCombinedTemplate = "Combined";

/// Model file form of a combined graph: a single template, every variable global.
MasTemplate to_model(const CombinedGraph& c);

/// True for models produced by `to_model` (one template carrying component names).
bool is_combined(const MasTemplate& m);

/// Reads a combined model back into a CombinedGraph.
CombinedGraph as_combined(const MasTemplate& m);

} // namespace mabs
