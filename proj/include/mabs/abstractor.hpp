#pragma once

#include "mabs/approx.hpp"
#include "mabs/config.hpp"
#include "mabs/domain.hpp"
#include "mabs/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mabs {

/// Which variables to drop from which graph, where, and what to keep of them.
struct MappingFunction {
    std::string target;               // template name or "ext"
    std::vector<std::string> scope;   // empty: every location of the target
    std::vector<std::string> remove;
    std::optional<MergeSpec> merge;   // fresh variable defined over the removed ones
};

MappingFunction mapping_from_config(const Config& c);

struct BoundaryEdge {
    std::string source;
    std::string target;
    bool entering = false;  // out of scope -> in scope; otherwise exiting
    std::string label;
};

/// Edges of the target crossing the scope boundary, in edge order. Empty for full scope.
/// For "ext" a scope item is either a full location tuple or `Instance.location`.
std::vector<BoundaryEdge> check_scope_boundary(const MasTemplate& m, const MappingFunction& f);

struct AbstractionResult {
    MasTemplate model;
    std::vector<std::string> warnings;
    std::vector<BoundaryEdge> needs_confirmation;  // exiting edges dropped from a must-abstraction
};

/// Emits the may-abstraction for an upper domain and the must-abstraction for a lower one.
/// Inside the scope removed variables are substituted per domain vector (jointly, one
/// edge variant per vector). A must edge is kept only when it fires, with the same
/// retained effect, for every vector of the internally computed upper approximation.
AbstractionResult abstract(const MasTemplate& m, const MappingFunction& f, const LocalDomain& d,
                           const ApproxOptions& opts = {});

} // namespace mabs
