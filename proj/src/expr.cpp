#include "mabs/expr.hpp"

#include "mabs/error.hpp"

#include <charconv>
#include <vector>

namespace mabs {

namespace {

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

bool fits16(long v) { return v >= kIntMin && v <= kIntMax; }

// Printing precedence; higher binds tighter.
int precedence(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Literal:
        return e.value < 0 ? 7 : 8;
    case Expr::Kind::Name:
    case Expr::Kind::Member:
        return 8;
    case Expr::Kind::Unary:
        return 7;
    case Expr::Kind::Quant:
        return 0;
    case Expr::Kind::Binary:
        switch (e.binary_op) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq:
        case BinaryOp::Ne: return 3;
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Ge:
        case BinaryOp::Gt: return 4;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 5;
        default: return 6;
        }
    }
    return 8;
}

void print(const Expr& e, std::string& out);

void print_operand(const Expr& e, bool parens, std::string& out) {
    if (parens) out += '(';
    print(e, out);
    if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
    switch (e.kind) {
    case Expr::Kind::Literal:
        out += std::to_string(e.value);
        return;
    case Expr::Kind::Name:
        out += e.name;
        return;
    case Expr::Kind::Member:
        out += e.name;
        if (e.lhs) {
            out += '(';
            print(*e.lhs, out);
            out += ')';
        }
        out += '.';
        out += e.member;
        return;
    case Expr::Kind::Unary: {
        out += e.unary_op == UnaryOp::Neg ? '-' : '!';
        std::string inner;
        print(*e.lhs, inner);
        bool parens = precedence(*e.lhs) < 7 || inner.front() == '-';
        if (parens) out += '(';
        out += inner;
        if (parens) out += ')';
        return;
    }
    case Expr::Kind::Binary: {
        int p = precedence(e);
        print_operand(*e.lhs, precedence(*e.lhs) < p, out);
        out += ' ';
        out += op_text(e.binary_op);
        out += ' ';
        print_operand(*e.rhs, precedence(*e.rhs) <= p, out);
        return;
    }
    case Expr::Kind::Quant:
        out += e.quantifier == Quantifier::Exists ? "exists(" : "forall(";
        out += e.name;
        out += ":int[";
        print(*e.lhs, out);
        out += ',';
        print(*e.rhs, out);
        out += "]) (";
        print(*e.body, out);
        out += ')';
        return;
    }
}

std::optional<int> apply_binary(BinaryOp op, long a, long b) {
    long r = 0;
    switch (op) {
    case BinaryOp::Add: r = a + b; break;
    case BinaryOp::Sub: r = a - b; break;
    case BinaryOp::Mul: r = a * b; break;
    case BinaryOp::Div:
        if (b == 0) return std::nullopt;
        r = a / b;
        break;
    case BinaryOp::Mod:
        if (b == 0) return std::nullopt;
        r = a % b;
        break;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
    case BinaryOp::Ge: return a >= b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::And: return a != 0 && b != 0;
    case BinaryOp::Or: return a != 0 || b != 0;
    }
    if (!fits16(r)) return std::nullopt;
    return static_cast<int>(r);
}

ExprPtr substitute_impl(const ExprPtr& e, const Substitution& subst, std::vector<std::string>& bound) {
    if (!e) return e;
    auto is_bound = [&](const std::string& n) {
        for (const auto& b : bound)
            if (b == n) return true;
        return false;
    };
    switch (e->kind) {
    case Expr::Kind::Literal:
        return e;
    case Expr::Kind::Name: {
        if (is_bound(e->name)) return e;
        auto r = subst(e->name);
        return r ? r : e;
    }
    case Expr::Kind::Member: {
        ExprPtr index = substitute_impl(e->lhs, subst, bound);
        if (index) index = fold(index);
        Expr copy = *e;
        copy.lhs = index;
        if (auto owner = member_owner(copy)) {
            if (auto r = subst(*owner + "." + e->member)) return r;
        }
        if (index == e->lhs) return e;
        return make(std::move(copy));
    }
    case Expr::Kind::Unary: {
        auto operand = substitute_impl(e->lhs, subst, bound);
        return operand == e->lhs ? e : unary(e->unary_op, operand);
    }
    case Expr::Kind::Binary: {
        auto l = substitute_impl(e->lhs, subst, bound);
        auto r = substitute_impl(e->rhs, subst, bound);
        return (l == e->lhs && r == e->rhs) ? e : binary(e->binary_op, l, r);
    }
    case Expr::Kind::Quant: {
        auto lo = substitute_impl(e->lhs, subst, bound);
        auto hi = substitute_impl(e->rhs, subst, bound);
        bound.push_back(e->name);
        auto body = substitute_impl(e->body, subst, bound);
        bound.pop_back();
        if (lo == e->lhs && hi == e->rhs && body == e->body) return e;
        return quant(e->quantifier, e->name, lo, hi, body);
    }
    }
    return e;
}

ExprPtr fold_impl(const ExprPtr& e, const std::map<std::string, int>& constants, std::vector<std::string>& bound) {
    if (!e) return e;
    switch (e->kind) {
    case Expr::Kind::Literal:
        return e;
    case Expr::Kind::Name: {
        for (const auto& b : bound)
            if (b == e->name) return e;
        auto it = constants.find(e->name);
        return it == constants.end() ? e : lit(it->second);
    }
    case Expr::Kind::Member: {
        if (!e->lhs) return e;
        auto index = fold_impl(e->lhs, constants, bound);
        if (index == e->lhs) return e;
        return member(e->name, index, e->member);
    }
    case Expr::Kind::Unary: {
        auto operand = fold_impl(e->lhs, constants, bound);
        if (auto v = literal_value(operand)) {
            if (e->unary_op == UnaryOp::Not) return lit(*v == 0);
            if (fits16(-static_cast<long>(*v))) return lit(-*v);
        }
        return operand == e->lhs ? e : unary(e->unary_op, operand);
    }
    case Expr::Kind::Binary: {
        auto l = fold_impl(e->lhs, constants, bound);
        auto r = fold_impl(e->rhs, constants, bound);
        auto lv = literal_value(l);
        auto rv = literal_value(r);
        if (lv && rv) {
            if (auto v = apply_binary(e->binary_op, *lv, *rv)) return lit(*v);
        }
        if (e->binary_op == BinaryOp::And) {
            if ((lv && *lv == 0) || (rv && *rv == 0)) return lit(0);
            if (lv && is_boolean(*r)) return r;
            if (rv && is_boolean(*l)) return l;
        } else if (e->binary_op == BinaryOp::Or) {
            if ((lv && *lv != 0) || (rv && *rv != 0)) return lit(1);
            if (lv && is_boolean(*r)) return r;
            if (rv && is_boolean(*l)) return l;
        }
        return (l == e->lhs && r == e->rhs) ? e : binary(e->binary_op, l, r);
    }
    case Expr::Kind::Quant: {
        auto lo = fold_impl(e->lhs, constants, bound);
        auto hi = fold_impl(e->rhs, constants, bound);
        bound.push_back(e->name);
        auto body = fold_impl(e->body, constants, bound);
        bound.pop_back();
        auto lov = literal_value(lo);
        auto hiv = literal_value(hi);
        if (lov && hiv && *lov > *hiv) return lit(e->quantifier == Quantifier::Forall);
        if (auto bv = literal_value(body)) {
            if (lov && hiv) return lit(*bv != 0);
        }
        if (lo == e->lhs && hi == e->rhs && body == e->body) return e;
        return quant(e->quantifier, e->name, lo, hi, body);
    }
    }
    return e;
}

struct Binding {
    std::string_view name;
    int value;
};

int eval_impl(const Expr& e, const Env& env, std::vector<Binding>& bound) {
    switch (e.kind) {
    case Expr::Kind::Literal:
        return e.value;
    case Expr::Kind::Name: {
        for (auto it = bound.rbegin(); it != bound.rend(); ++it)
            if (it->name == e.name) return it->value;
        if (auto v = env.value_of(e.name)) return *v;
        throw EvalError("unbound name '" + e.name + "'");
    }
    case Expr::Kind::Member: {
        std::string owner = e.name;
        if (e.lhs) owner += "(" + std::to_string(eval_impl(*e.lhs, env, bound)) + ")";
        std::string full = owner + "." + e.member;
        if (auto v = env.value_of(full)) return *v;
        if (auto at = env.located(owner, e.member)) return *at ? 1 : 0;
        if (!e.lhs) {
            // `Agent.x` for a single-instance template means `Agent(1).x`.
            std::string first = e.name + "(1)";
            if (auto v = env.value_of(first + "." + e.member)) return *v;
            if (auto at = env.located(first, e.member)) return *at ? 1 : 0;
        }
        throw EvalError("unbound name '" + full + "'");
    }
    case Expr::Kind::Unary: {
        int v = eval_impl(*e.lhs, env, bound);
        if (e.unary_op == UnaryOp::Not) return v == 0;
        if (!fits16(-static_cast<long>(v))) throw EvalError("16-bit overflow in " + to_string(e));
        return -v;
    }
    case Expr::Kind::Binary: {
        int l = eval_impl(*e.lhs, env, bound);
        if (e.binary_op == BinaryOp::And && l == 0) return 0;
        if (e.binary_op == BinaryOp::Or && l != 0) return 1;
        int r = eval_impl(*e.rhs, env, bound);
        if ((e.binary_op == BinaryOp::Div || e.binary_op == BinaryOp::Mod) && r == 0)
            throw EvalError("division by zero in " + to_string(e));
        auto v = apply_binary(e.binary_op, l, r);
        if (!v) throw EvalError("16-bit overflow in " + to_string(e));
        return *v;
    }
    case Expr::Kind::Quant: {
        int lo = eval_impl(*e.lhs, env, bound);
        int hi = eval_impl(*e.rhs, env, bound);
        bool exists = e.quantifier == Quantifier::Exists;
        for (int i = lo; i <= hi; ++i) {
            bound.push_back({e.name, i});
            int v = eval_impl(*e.body, env, bound);
            bound.pop_back();
            if (exists && v != 0) return 1;
            if (!exists && v == 0) return 0;
        }
        return exists ? 0 : 1;
    }
    }
    return 0;
}

void collect_impl(const Expr& e, std::set<std::string>& out, std::vector<std::string>& bound) {
    switch (e.kind) {
    case Expr::Kind::Literal:
        return;
    case Expr::Kind::Name:
        for (const auto& b : bound)
            if (b == e.name) return;
        out.insert(e.name);
        return;
    case Expr::Kind::Member:
        if (e.lhs) collect_impl(*e.lhs, out, bound);
        if (auto owner = member_owner(e)) out.insert(*owner + "." + e.member);
        return;
    case Expr::Kind::Unary:
        collect_impl(*e.lhs, out, bound);
        return;
    case Expr::Kind::Binary:
        collect_impl(*e.lhs, out, bound);
        collect_impl(*e.rhs, out, bound);
        return;
    case Expr::Kind::Quant:
        collect_impl(*e.lhs, out, bound);
        collect_impl(*e.rhs, out, bound);
        bound.push_back(e.name);
        collect_impl(*e.body, out, bound);
        bound.pop_back();
        return;
    }
}

} // namespace

ExprPtr lit(int value) {
    Expr e;
    e.kind = Expr::Kind::Literal;
    e.value = value;
    return make(std::move(e));
}

ExprPtr ref(std::string name) {
    // "Owner(k).member" and "Owner.member" become member nodes so that printed
    // qualified names parse back to the same tree.
    auto dot = name.find('.');
    if (dot != std::string::npos) {
        std::string owner = name.substr(0, dot);
        std::string mem = name.substr(dot + 1);
        auto open = owner.find('(');
        if (open == std::string::npos) return member(owner, nullptr, mem);
        int k = 0;
        auto first = owner.data() + open + 1;
        auto last = owner.data() + owner.size() - 1;
        auto [ptr, ec] = std::from_chars(first, last, k);
        if (ec == std::errc{} && ptr == last && owner.back() == ')')
            return member(owner.substr(0, open), lit(k), mem);
    }
    Expr e;
    e.kind = Expr::Kind::Name;
    e.name = std::move(name);
    return make(std::move(e));
}

ExprPtr member(std::string owner, ExprPtr index, std::string member_name) {
    Expr e;
    e.kind = Expr::Kind::Member;
    e.name = std::move(owner);
    e.lhs = std::move(index);
    e.member = std::move(member_name);
    return make(std::move(e));
}

ExprPtr unary(UnaryOp op, ExprPtr operand) {
    Expr e;
    e.kind = Expr::Kind::Unary;
    e.unary_op = op;
    e.lhs = std::move(operand);
    return make(std::move(e));
}

ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    Expr e;
    e.kind = Expr::Kind::Binary;
    e.binary_op = op;
    e.lhs = std::move(lhs);
    e.rhs = std::move(rhs);
    return make(std::move(e));
}

ExprPtr quant(Quantifier q, std::string index, ExprPtr lo, ExprPtr hi, ExprPtr body) {
    Expr e;
    e.kind = Expr::Kind::Quant;
    e.quantifier = q;
    e.name = std::move(index);
    e.lhs = std::move(lo);
    e.rhs = std::move(hi);
    e.body = std::move(body);
    return make(std::move(e));
}

ExprPtr conjoin(ExprPtr lhs, ExprPtr rhs) {
    auto trivially_true = [](const ExprPtr& e) {
        auto v = literal_value(e);
        return !e || (v && *v != 0);
    };
    if (trivially_true(lhs)) return rhs;
    if (trivially_true(rhs)) return lhs;
    return binary(BinaryOp::And, std::move(lhs), std::move(rhs));
}

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Expr::Kind::Literal:
        return a.value == b.value;
    case Expr::Kind::Name:
        return a.name == b.name;
    case Expr::Kind::Member:
        return a.name == b.name && a.member == b.member && equal(a.lhs, b.lhs);
    case Expr::Kind::Unary:
        return a.unary_op == b.unary_op && equal(*a.lhs, *b.lhs);
    case Expr::Kind::Binary:
        return a.binary_op == b.binary_op && equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    case Expr::Kind::Quant:
        return a.quantifier == b.quantifier && a.name == b.name && equal(*a.lhs, *b.lhs) &&
               equal(*a.rhs, *b.rhs) && equal(*a.body, *b.body);
    }
    return false;
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return a == b || equal(*a, *b);
}

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

std::string to_string(const ExprPtr& e) { return e ? to_string(*e) : std::string("true"); }

std::string_view op_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
    }
    return "?";
}

std::optional<std::string> member_owner(const Expr& e) {
    if (e.kind != Expr::Kind::Member) return std::nullopt;
    if (!e.lhs) return e.name;
    if (e.lhs->kind != Expr::Kind::Literal) return std::nullopt;
    return e.name + "(" + std::to_string(e.lhs->value) + ")";
}

bool is_boolean(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Literal:
        return e.value == 0 || e.value == 1;
    case Expr::Kind::Unary:
        return e.unary_op == UnaryOp::Not;
    case Expr::Kind::Binary:
        return precedence(e) <= 4;
    case Expr::Kind::Quant:
        return true;
    default:
        return false;
    }
}

void collect_names(const Expr& e, std::set<std::string>& out) {
    std::vector<std::string> bound;
    collect_impl(e, out, bound);
}

std::set<std::string> free_names(const ExprPtr& e) {
    std::set<std::string> out;
    if (e) collect_names(*e, out);
    return out;
}

ExprPtr substitute(const ExprPtr& e, const Substitution& subst) {
    std::vector<std::string> bound;
    return substitute_impl(e, subst, bound);
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& subst) {
    if (subst.empty()) return e;
    return substitute(e, [&](const std::string& n) -> ExprPtr {
        auto it = subst.find(n);
        return it == subst.end() ? nullptr : it->second;
    });
}

ExprPtr fold(const ExprPtr& e, const std::map<std::string, int>& constants) {
    std::vector<std::string> bound;
    return fold_impl(e, constants, bound);
}

ExprPtr unroll_quantifiers(const ExprPtr& e, const std::map<std::string, int>& constants) {
    if (!e) return e;
    switch (e->kind) {
    case Expr::Kind::Literal:
    case Expr::Kind::Name:
    case Expr::Kind::Member:
        return e;
    case Expr::Kind::Unary:
        return unary(e->unary_op, unroll_quantifiers(e->lhs, constants));
    case Expr::Kind::Binary:
        return binary(e->binary_op, unroll_quantifiers(e->lhs, constants), unroll_quantifiers(e->rhs, constants));
    case Expr::Kind::Quant: {
        auto lo = literal_value(fold(e->lhs, constants));
        auto hi = literal_value(fold(e->rhs, constants));
        if (!lo || !hi) return e;
        bool exists = e->quantifier == Quantifier::Exists;
        ExprPtr acc = lit(exists ? 0 : 1);
        for (int i = *lo; i <= *hi; ++i) {
            const std::string& index = e->name;
            auto inst = substitute(e->body, [&](const std::string& n) -> ExprPtr {
                return n == index ? lit(i) : nullptr;
            });
            inst = unroll_quantifiers(fold(inst, constants), constants);
            acc = i == *lo ? inst : binary(exists ? BinaryOp::Or : BinaryOp::And, acc, inst);
        }
        // Keep the result boolean even for a single-element range.
        if (*lo == *hi && !is_boolean(*acc)) acc = binary(BinaryOp::Ne, acc, lit(0));
        return acc;
    }
    }
    return e;
}

std::optional<int> literal_value(const ExprPtr& e) {
    if (e && e->kind == Expr::Kind::Literal) return e->value;
    return std::nullopt;
}

std::optional<bool> Env::located(std::string_view, std::string_view) const { return std::nullopt; }

std::optional<int> MapEnv::value_of(std::string_view name) const {
    auto it = values.find(name);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

std::optional<bool> MapEnv::located(std::string_view instance, std::string_view location) const {
    auto it = locations.find(instance);
    if (it == locations.end()) return std::nullopt;
    return it->second == location;
}

int eval(const Expr& e, const Env& env) {
    std::vector<Binding> bound;
    return eval_impl(e, env, bound);
}

} // namespace mabs
