#pragma once

#include "mabs/model.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mabs {

/// Contents of one declaration block (global or template-local).
struct Declarations {
    std::vector<std::pair<std::string, int>> constants;
    std::vector<VarDecl> vars;
    std::vector<std::string> channels;
};

/// C-style precedence: unary > multiplicative > additive > relational > equality > && > ||.
/// Quantifiers `exists(i:int[lo,hi]) body` extend as far right as possible.
ExprPtr parse_expr(std::string_view text);

/// Comma-separated assignments: `x = e`, `x := e`, `x++`, `x--`, `x += e`, `x -= e`.
std::vector<Update> parse_updates(std::string_view text);

/// Comma-separated `name : int[lo,hi]`; bounds may use constants.
std::vector<Select> parse_selects(std::string_view text, const std::map<std::string, int>& constants);

/// `chan!` or `chan?`.
Sync parse_sync(std::string_view text);

/// Parses declarations; `outer` holds constants already in scope. Clocks, arrays,
/// broadcast/urgent channels, typedefs and functions raise UnsupportedFeature.
Declarations parse_declarations(std::string_view text, VarKind kind, const std::map<std::string, int>& outer = {});

struct Query {
    enum class Kind : std::uint8_t { Invariant, Reachability };  // A[] p, E<> p
    Kind kind = Kind::Invariant;
    ExprPtr proposition;
};

Query parse_query(std::string_view text);
std::string to_string(const Query& q);

/// Prints an update list in the form accepted by parse_updates.
std::string to_string(const std::vector<Update>& updates);
std::string to_string(const std::vector<Select>& selects);
std::string to_string(const Sync& sync);

} // namespace mabs
