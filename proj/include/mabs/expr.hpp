#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace mabs {

enum class UnaryOp : std::uint8_t { Neg, Not };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Mod, Lt, Le, Eq, Ne, Ge, Gt, And, Or };
enum class Quantifier : std::uint8_t { Exists, Forall };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node over bounded integers. Booleans are 0/1.
///
/// `Member` covers both `Agent(i).var` and `Agent(i).location`; which one it denotes is
/// decided when the expression is evaluated or compiled against a concrete model.
struct Expr {
    enum class Kind : std::uint8_t { Literal, Name, Member, Unary, Binary, Quant };

    Kind kind = Kind::Literal;
    int value = 0;       // Literal
    std::string name;    // Name: identifier; Member: owner template; Quant: bound index
    std::string member;  // Member: variable or location name
    UnaryOp unary_op = UnaryOp::Neg;
    BinaryOp binary_op = BinaryOp::Add;
    Quantifier quantifier = Quantifier::Exists;
    ExprPtr lhs;   // Unary operand, Binary lhs, Member owner index (may be null), Quant lower bound
    ExprPtr rhs;   // Binary rhs, Quant upper bound
    ExprPtr body;  // Quant body
};

ExprPtr lit(int value);
ExprPtr ref(std::string name);
ExprPtr member(std::string owner, ExprPtr index, std::string member_name);
ExprPtr unary(UnaryOp op, ExprPtr operand);
ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr quant(Quantifier q, std::string index, ExprPtr lo, ExprPtr hi, ExprPtr body);

/// Guard conjunction; null operands and nonzero literals are dropped.
ExprPtr conjoin(ExprPtr lhs, ExprPtr rhs);

bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);  // null == null

/// Canonical text; parses back to an equal tree.
std::string to_string(const Expr& e);
std::string to_string(const ExprPtr& e);  // null prints as "true"

std::string_view op_text(BinaryOp op);

/// Instance-qualified name `Owner(k)` for a member node whose index folds to a literal,
/// `Owner` when the index is absent, nullopt otherwise.
std::optional<std::string> member_owner(const Expr& e);

/// True when the node always evaluates to 0 or 1.
bool is_boolean(const Expr& e);

/// Free names: unbound `Name` nodes plus resolvable `Member` nodes as `Owner(k).member`.
void collect_names(const Expr& e, std::set<std::string>& out);
std::set<std::string> free_names(const ExprPtr& e);

/// Replaces free names. The callback returns null to keep a name unchanged.
/// Resolvable members are offered under their qualified name.
using Substitution = std::function<ExprPtr(const std::string&)>;
ExprPtr substitute(const ExprPtr& e, const Substitution& subst);
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& subst);

/// Constant folding. Names found in `constants` become literals; subtrees that would
/// fail at runtime (division by zero, overflow) are left unfolded.
ExprPtr fold(const ExprPtr& e, const std::map<std::string, int>& constants = {});

/// Replaces quantifiers whose bounds fold to literals by explicit ||/&& chains.
ExprPtr unroll_quantifiers(const ExprPtr& e, const std::map<std::string, int>& constants = {});

/// Literal value of a folded expression, if it is one.
std::optional<int> literal_value(const ExprPtr& e);

// --- evaluation -----------------------------------------------------------------------

/// Name lookup used by `eval`. Location predicates are answered by `located`.
class Env {
public:
    virtual ~Env() = default;
    virtual std::optional<int> value_of(std::string_view name) const = 0;
    virtual std::optional<bool> located(std::string_view instance, std::string_view location) const;
};

/// Map-backed environment, mostly for tests and small analyses.
class MapEnv : public Env {
public:
    std::map<std::string, int, std::less<>> values;
    std::map<std::string, std::string, std::less<>> locations;  // instance -> location

    std::optional<int> value_of(std::string_view name) const override;
    std::optional<bool> located(std::string_view instance, std::string_view location) const override;
};

inline constexpr int kIntMin = -32768;
inline constexpr int kIntMax = 32767;

/// Evaluates `e` with 16-bit overflow checking. Throws EvalError on division by zero,
/// overflow or an unbound name.
int eval(const Expr& e, const Env& env);

} // namespace mabs
