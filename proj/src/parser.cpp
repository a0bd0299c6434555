#include "mabs/parser.hpp"

#include "mabs/error.hpp"

#include <cctype>
#include <charconv>

namespace mabs {

namespace {

enum class Tok : std::uint8_t { Int, Ident, Op, End };

struct Token {
    Tok kind;
    std::string text;
    int value = 0;
    std::size_t offset = 0;
};

std::vector<Token> lex(std::string_view src) {
    static constexpr std::string_view two_char[] = {"<=", ">=", "==", "!=", "&&", "||", ":=", "++", "--", "+=", "-="};
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (src.substr(i, 2) == "//") {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        if (src.substr(i, 2) == "/*") {
            auto end = src.find("*/", i + 2);
            if (end == std::string_view::npos) throw ParseError("unterminated comment at offset " + std::to_string(i));
            i = end + 2;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            long v = 0;
            auto [p, ec] = std::from_chars(src.data() + i, src.data() + j, v);
            if (ec != std::errc{} || v > 32768)
                throw ParseError("integer literal out of 16-bit range at offset " + std::to_string(i));
            out.push_back({Tok::Int, std::string(src.substr(i, j - i)), static_cast<int>(v), i});
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), 0, i});
            i = j;
            continue;
        }
        bool matched = false;
        for (auto op : two_char) {
            if (src.substr(i, 2) == op) {
                out.push_back({Tok::Op, std::string(op), 0, i});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("+-*/%<>!()[],:.=;?{}").find(c) == std::string_view::npos)
            throw ParseError(std::string("unexpected character '") + c + "' at offset " + std::to_string(i));
        out.push_back({Tok::Op, std::string(1, c), 0, i});
        ++i;
    }
    out.push_back({Tok::End, "", 0, src.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    bool at_end() const { return peek().kind == Tok::End; }

    bool is_op(std::string_view op, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind == Tok::Op && t.text == op;
    }
    bool is_word(std::string_view w, std::size_t ahead = 0) const {
        const auto& t = peek(ahead);
        return t.kind == Tok::Ident && t.text == w;
    }
    bool accept_op(std::string_view op) {
        if (!is_op(op)) return false;
        ++pos_;
        return true;
    }
    bool accept_word(std::string_view w) {
        if (!is_word(w)) return false;
        ++pos_;
        return true;
    }
    void expect_op(std::string_view op) {
        if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
    }
    std::string expect_ident() {
        if (peek().kind != Tok::Ident) fail("expected identifier");
        return toks_[pos_++].text;
    }
    void expect_end() {
        if (!at_end()) fail("unexpected trailing input");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        const auto& t = peek();
        throw ParseError(msg + " at offset " + std::to_string(t.offset) + " near '" +
                         (t.kind == Tok::End ? std::string("<end>") : t.text) + "' in \"" + std::string(src_) + "\"");
    }

    ExprPtr expr() { return parse_or(); }

    /// `Name`, `Owner(index).member` or `Owner.member`.
    ExprPtr qualified_name() {
        std::string first = expect_ident();
        if (is_op("(")) {
            ++pos_;
            ExprPtr index = expr();
            expect_op(")");
            if (!accept_op(".")) fail("function calls are not supported");
            return member(first, fold(index), expect_ident());
        }
        if (accept_op(".")) return member(first, nullptr, expect_ident());
        if (is_op("[")) throw UnsupportedFeature("array access on '" + first + "' is not supported");
        return ref(first);
    }

    std::string target_name() {
        ExprPtr e = qualified_name();
        std::set<std::string> names;
        collect_names(*e, names);
        if (names.size() != 1) fail("assignment target must be a variable");
        return *names.begin();
    }

    void skip(std::size_t n) { pos_ = std::min(pos_ + n, toks_.size() - 1); }

private:
    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (accept_op("||") || accept_word("or")) lhs = binary(BinaryOp::Or, lhs, parse_and());
        return lhs;
    }
    ExprPtr parse_and() {
        ExprPtr lhs = parse_eq();
        while (accept_op("&&") || accept_word("and")) lhs = binary(BinaryOp::And, lhs, parse_eq());
        return lhs;
    }
    ExprPtr parse_eq() {
        ExprPtr lhs = parse_rel();
        while (true) {
            if (accept_op("=="))
                lhs = binary(BinaryOp::Eq, lhs, parse_rel());
            else if (accept_op("!="))
                lhs = binary(BinaryOp::Ne, lhs, parse_rel());
            else
                return lhs;
        }
    }
    ExprPtr parse_rel() {
        ExprPtr lhs = parse_add();
        while (true) {
            if (accept_op("<="))
                lhs = binary(BinaryOp::Le, lhs, parse_add());
            else if (accept_op(">="))
                lhs = binary(BinaryOp::Ge, lhs, parse_add());
            else if (accept_op("<"))
                lhs = binary(BinaryOp::Lt, lhs, parse_add());
            else if (accept_op(">"))
                lhs = binary(BinaryOp::Gt, lhs, parse_add());
            else
                return lhs;
        }
    }
    ExprPtr parse_add() {
        ExprPtr lhs = parse_mul();
        while (true) {
            if (accept_op("+"))
                lhs = binary(BinaryOp::Add, lhs, parse_mul());
            else if (accept_op("-"))
                lhs = binary(BinaryOp::Sub, lhs, parse_mul());
            else
                return lhs;
        }
    }
    ExprPtr parse_mul() {
        ExprPtr lhs = parse_unary();
        while (true) {
            BinaryOp op;
            if (accept_op("*"))
                op = BinaryOp::Mul;
            else if (accept_op("/"))
                op = BinaryOp::Div;
            else if (accept_op("%"))
                op = BinaryOp::Mod;
            else
                return lhs;
            ExprPtr rhs = parse_unary();
            if (op != BinaryOp::Mul && literal_value(rhs) == 0) fail("division by literal zero");
            lhs = binary(op, lhs, rhs);
        }
    }
    ExprPtr parse_unary() {
        if (accept_op("-")) {
            ExprPtr operand = parse_unary();
            if (auto v = literal_value(operand)) return lit(-*v);
            return unary(UnaryOp::Neg, operand);
        }
        if (accept_op("!") || accept_word("not")) return unary(UnaryOp::Not, parse_unary());
        return parse_primary();
    }
    ExprPtr parse_primary() {
        const Token& t = peek();
        if (t.kind == Tok::Int) {
            ++pos_;
            if (t.value > kIntMax && !(pos_ >= 2 && toks_[pos_ - 2].text == "-"))
                fail("integer literal out of 16-bit range");
            return lit(t.value);
        }
        if (accept_op("(")) {
            ExprPtr e = expr();
            expect_op(")");
            return e;
        }
        if (accept_word("true")) return lit(1);
        if (accept_word("false")) return lit(0);
        if (is_word("exists") || is_word("forall")) {
            Quantifier q = peek().text == "exists" ? Quantifier::Exists : Quantifier::Forall;
            ++pos_;
            expect_op("(");
            std::string index = expect_ident();
            expect_op(":");
            if (!accept_word("int")) fail("quantifier range must be int[lo,hi]");
            expect_op("[");
            ExprPtr lo = expr();
            expect_op(",");
            ExprPtr hi = expr();
            expect_op("]");
            expect_op(")");
            return quant(q, index, lo, hi, expr());
        }
        if (t.kind == Tok::Ident) {
            if (t.text == "deadlock") throw UnsupportedFeature("the deadlock predicate is not supported");
            return qualified_name();
        }
        fail("expected expression");
    }

    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

int const_value(const ExprPtr& e, const std::map<std::string, int>& constants, const std::string& what) {
    auto v = literal_value(fold(e, constants));
    if (!v) throw SpecError(what + " must be a constant expression, got '" + to_string(e) + "'");
    return *v;
}

} // namespace

ExprPtr parse_expr(std::string_view text) {
    Parser p(text);
    ExprPtr e = p.expr();
    p.expect_end();
    return e;
}

std::vector<Update> parse_updates(std::string_view text) {
    Parser p(text);
    std::vector<Update> out;
    if (p.at_end()) return out;
    do {
        std::string target = p.target_name();
        ExprPtr self = ref(target);
        if (p.accept_op("=") || p.accept_op(":="))
            out.push_back({target, p.expr()});
        else if (p.accept_op("++"))
            out.push_back({target, binary(BinaryOp::Add, self, lit(1))});
        else if (p.accept_op("--"))
            out.push_back({target, binary(BinaryOp::Sub, self, lit(1))});
        else if (p.accept_op("+="))
            out.push_back({target, binary(BinaryOp::Add, self, p.expr())});
        else if (p.accept_op("-="))
            out.push_back({target, binary(BinaryOp::Sub, self, p.expr())});
        else
            p.fail("expected assignment operator");
    } while (p.accept_op(","));
    p.expect_end();
    return out;
}

std::vector<Select> parse_selects(std::string_view text, const std::map<std::string, int>& constants) {
    Parser p(text);
    std::vector<Select> out;
    if (p.at_end()) return out;
    do {
        Select s;
        s.name = p.expect_ident();
        p.expect_op(":");
        if (!p.accept_word("int")) throw UnsupportedFeature("select '" + s.name + "' must range over int[lo,hi]");
        p.expect_op("[");
        s.lo = const_value(p.expr(), constants, "select bound");
        p.expect_op(",");
        s.hi = const_value(p.expr(), constants, "select bound");
        p.expect_op("]");
        out.push_back(s);
    } while (p.accept_op(","));
    p.expect_end();
    return out;
}

Sync parse_sync(std::string_view text) {
    Parser p(text);
    Sync s;
    s.channel = p.expect_ident();
    if (p.is_op("[")) throw UnsupportedFeature("channel arrays are not supported ('" + s.channel + "')");
    if (p.accept_op("!"))
        s.dir = SyncDir::Send;
    else if (p.accept_op("?"))
        s.dir = SyncDir::Receive;
    else
        p.fail("expected '!' or '?' after channel name");
    p.expect_end();
    return s;
}

Declarations parse_declarations(std::string_view text, VarKind kind, const std::map<std::string, int>& outer) {
    Parser p(text);
    Declarations out;
    std::map<std::string, int> constants = outer;

    while (!p.at_end()) {
        if (p.accept_op(";")) continue;
        for (std::string_view w : {"clock", "broadcast", "urgent", "typedef", "struct", "void", "double", "meta",
                                   "scalar", "hybrid"}) {
            if (p.is_word(w)) throw UnsupportedFeature("declaration kind '" + std::string(w) + "' is not supported");
        }
        bool is_const = p.accept_word("const");
        bool is_chan = false;
        int lo = kIntMin, hi = kIntMax;
        if (p.accept_word("int")) {
            if (p.accept_op("[")) {
                lo = const_value(p.expr(), constants, "range bound");
                p.expect_op(",");
                hi = const_value(p.expr(), constants, "range bound");
                p.expect_op("]");
            }
        } else if (p.accept_word("bool")) {
            lo = 0;
            hi = 1;
        } else if (p.accept_word("chan")) {
            is_chan = true;
        } else {
            p.fail("expected a declaration");
        }
        if (is_const && is_chan) p.fail("channels cannot be const");

        do {
            std::string name = p.target_name();
            if (p.is_op("[")) throw UnsupportedFeature("array declaration '" + name + "' is not supported");
            if (p.is_op("(")) throw UnsupportedFeature("function declaration '" + name + "' is not supported");
            if (is_chan) {
                out.channels.push_back(name);
                continue;
            }
            std::optional<int> init;
            if (p.accept_op("=")) init = const_value(p.expr(), constants, "initializer of '" + name + "'");
            if (is_const) {
                if (!init) throw SpecError("constant '" + name + "' needs a value");
                constants[name] = *init;
                out.constants.emplace_back(name, *init);
            } else {
                out.vars.push_back({name, lo, hi, init.value_or(0), kind});
            }
        } while (p.accept_op(","));
        p.expect_op(";");
    }
    return out;
}

Query parse_query(std::string_view text) {
    Parser p(text);
    Query q;
    if (p.is_word("A") && p.is_op("[", 1) && p.is_op("]", 2)) {
        q.kind = Query::Kind::Invariant;
    } else if (p.is_word("E") && p.is_op("<", 1) && p.is_op(">", 2)) {
        q.kind = Query::Kind::Reachability;
    } else {
        if ((p.is_word("A") || p.is_word("E")) || p.is_op("-"))
            throw UnsupportedFeature("only A[] p and E<> p queries are supported: \"" + std::string(text) + "\"");
        p.fail("expected 'A[]' or 'E<>'");
    }
    p.skip(3);
    q.proposition = p.expr();
    p.expect_end();
    return q;
}

std::string to_string(const Query& q) {
    return std::string(q.kind == Query::Kind::Invariant ? "A[] " : "E<> ") + to_string(q.proposition);
}

std::string to_string(const std::vector<Update>& updates) {
    std::string out;
    for (std::size_t i = 0; i < updates.size(); ++i) {
        if (i) out += ", ";
        out += updates[i].target + " = " + to_string(updates[i].value);
    }
    return out;
}

std::string to_string(const std::vector<Select>& selects) {
    std::string out;
    for (std::size_t i = 0; i < selects.size(); ++i) {
        if (i) out += ", ";
        out += selects[i].name + " : int[" + std::to_string(selects[i].lo) + "," + std::to_string(selects[i].hi) + "]";
    }
    return out;
}

std::string to_string(const Sync& sync) { return sync.channel + (sync.dir == SyncDir::Send ? "!" : "?"); }

} // namespace mabs
