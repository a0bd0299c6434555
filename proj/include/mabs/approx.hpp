#pragma once

#include "mabs/domain.hpp"
#include "mabs/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mabs {

/// The graph an approximation or abstraction works on: one template (with `id` left
/// symbolic) or the combined graph for target "ext". Selects are expanded and constants
/// folded.
struct TargetView {
    std::string target;
    bool ext = false;
    AgentGraph graph;
    int count = 1;                        // instances of the template
    std::map<std::string, VarDecl> vars;  // every readable variable; `id` for templates
    std::map<std::string, int> constants;

    const VarDecl& var(const std::string& name) const;
};

TargetView make_target(const MasTemplate& m, const std::string& target);

/// Throws SpecError unless every name is a variable the target alone controls: a private
/// of the template, a global read and written only by a single-instance template, or
/// any variable for "ext".
void check_target_variables(const MasTemplate& m, const TargetView& view, const std::vector<std::string>& vars);

struct ApproxOptions {
    std::vector<std::string> always_available;  // channels a lower approximation may cross
    std::uint64_t completion_cap = 4096;
    std::uint64_t vector_cap = 10'000'000;
};

/// Projected collecting semantics over `vars`. A guard removes a vector only if false
/// under every completion of the other variables it reads (upper), or keeps it only if
/// true under all of them with a single resulting vector (lower).
LocalDomain approx_upper(const MasTemplate& m, const std::string& target, const std::vector<std::string>& vars,
                         const ApproxOptions& opts = {});
LocalDomain approx_lower(const MasTemplate& m, const std::string& target, const std::vector<std::string>& vars,
                         const ApproxOptions& opts = {});
LocalDomain approximate(const MasTemplate& m, const std::string& target, const std::vector<std::string>& vars,
                        DomainTag tag, const ApproxOptions& opts = {});

/// Outcome of firing one edge from a vector over `vars` (used by the abstractor).
struct EdgeTransfer {
    std::vector<ValueVector> posts;  // sorted, distinct
    bool dropped = false;            // lower only: edge not provably enabled
};
EdgeTransfer transfer(const TargetView& view, const Edge& e, const std::vector<std::string>& vars,
                      const ValueVector& pre, DomainTag tag, const ApproxOptions& opts = {});

} // namespace mabs
