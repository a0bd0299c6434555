#pragma once

#include "mabs/expr.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mabs {

enum class VarKind : std::uint8_t { Global, Private };

struct VarDecl {
    std::string name;
    int lo = kIntMin;
    int hi = kIntMax;
    int initial = 0;
    VarKind kind = VarKind::Global;

    int size() const { return hi - lo + 1; }
    bool contains(int v) const { return v >= lo && v <= hi; }
    bool operator==(const VarDecl&) const = default;
};

struct Select {
    std::string name;
    int lo = 0;
    int hi = 0;
    bool operator==(const Select&) const = default;
};

enum class SyncDir : std::uint8_t { Send, Receive };

struct Sync {
    std::string channel;
    SyncDir dir = SyncDir::Send;
    bool operator==(const Sync&) const = default;
};

struct Update {
    std::string target;
    ExprPtr value;
};

struct Edge {
    std::string source;
    std::string target;
    std::vector<Select> selects;
    ExprPtr guard;  // null means no guard
    std::optional<Sync> sync;
    std::vector<Update> updates;
};

struct Location {
    std::string name;
    std::optional<std::pair<int, int>> position;  // editor coordinates, passed through
    bool operator==(const Location&) const = default;
};

/// One agent graph. For combined graphs `components` lists the agent instances whose
/// locations make up each tuple; location names are then the dot-joined tuple.
struct AgentGraph {
    std::string name;
    std::vector<Location> locations;
    std::string initial;
    std::vector<VarDecl> privates;
    std::vector<std::pair<std::string, int>> constants;
    std::vector<Edge> edges;
    std::vector<std::string> components;

    std::optional<std::size_t> location_index(std::string_view loc) const;
    bool has_location(std::string_view loc) const { return location_index(loc).has_value(); }
    const VarDecl* find_private(std::string_view var) const;
};

struct TemplateEntry {
    AgentGraph graph;
    int count = 1;
};

struct MasTemplate {
    std::vector<std::pair<std::string, int>> constants;
    std::vector<VarDecl> globals;
    std::vector<std::string> channels;
    std::vector<TemplateEntry> templates;

    const TemplateEntry* find_template(std::string_view name) const;
    TemplateEntry* find_template(std::string_view name);
    const VarDecl* find_global(std::string_view var) const;
    std::map<std::string, int> constant_map() const;
};

bool operator==(const Update& a, const Update& b);
bool operator==(const Edge& a, const Edge& b);
bool operator==(const AgentGraph& a, const AgentGraph& b);
bool operator==(const TemplateEntry& a, const TemplateEntry& b);
bool operator==(const MasTemplate& a, const MasTemplate& b);

/// Instance name of the k-th copy of a template, `Name(k)`.
std::string instance_name(std::string_view template_name, int k);

/// Human-readable edge identification for diagnostics, e.g. `Voter: idle -> waits`.
std::string describe(const std::string& owner, const Edge& e);

/// One edge per element of the Cartesian product of the select ranges, select names
/// replaced by literals; lexicographic order with the first select varying slowest.
std::vector<Edge> expand_selects(const Edge& e);

/// Checks every structural invariant of a template; throws SpecError naming the
/// offending template/edge.
void validate(const MasTemplate& m);

} // namespace mabs
