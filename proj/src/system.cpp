#include "mabs/system.hpp"

#include "mabs/error.hpp"

#include <array>
#include <cstring>

namespace mabs {

int Program::run(std::span<const int> values, std::span<const int> locations) const {
    std::array<int, 64> small{};
    std::vector<int> large;
    int* stack = small.data();
    if (depth > static_cast<int>(small.size())) {
        large.resize(depth);
        stack = large.data();
    }
    int sp = 0;
    auto overflow = [&]() { throw EvalError("16-bit overflow in " + text); };
    for (std::size_t ip = 0; ip < code.size(); ++ip) {
        const Instr& in = code[ip];
        switch (in.op) {
        case Op::Push: stack[sp++] = in.a; break;
        case Op::Load: stack[sp++] = values[in.a]; break;
        case Op::Loc: stack[sp++] = tables[in.b][locations[in.a]]; break;
        case Op::Neg:
            if (stack[sp - 1] == kIntMin) overflow();
            stack[sp - 1] = -stack[sp - 1];
            break;
        case Op::Not: stack[sp - 1] = stack[sp - 1] == 0; break;
        case Op::ToBool: stack[sp - 1] = stack[sp - 1] != 0; break;
        case Op::AndJump:
            if (stack[sp - 1] == 0) {
                ip = static_cast<std::size_t>(in.a) - 1;
            } else {
                --sp;
            }
            break;
        case Op::OrJump:
            if (stack[sp - 1] != 0) {
                stack[sp - 1] = 1;
                ip = static_cast<std::size_t>(in.a) - 1;
            } else {
                --sp;
            }
            break;
        default: {
            int r = stack[--sp];
            int l = stack[sp - 1];
            long v = 0;
            switch (in.op) {
            case Op::Add: v = static_cast<long>(l) + r; break;
            case Op::Sub: v = static_cast<long>(l) - r; break;
            case Op::Mul: v = static_cast<long>(l) * r; break;
            case Op::Div:
                if (r == 0) throw EvalError("division by zero in " + text);
                v = l / r;
                break;
            case Op::Mod:
                if (r == 0) throw EvalError("division by zero in " + text);
                v = l % r;
                break;
            case Op::Lt: v = l < r; break;
            case Op::Le: v = l <= r; break;
            case Op::Eq: v = l == r; break;
            case Op::Ne: v = l != r; break;
            case Op::Ge: v = l >= r; break;
            case Op::Gt: v = l > r; break;
            default: break;
            }
            if (v < kIntMin || v > kIntMax) overflow();
            stack[sp - 1] = static_cast<int>(v);
        }
        }
    }
    return stack[0];
}

std::optional<int> System::slot(std::string_view name) const {
    auto it = slots_.find(name);
    if (it == slots_.end()) return std::nullopt;
    return it->second;
}

void System::index_slots() {
    slots_.clear();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (!slots_.emplace(vars[i].name, static_cast<int>(i)).second)
            throw SpecError("duplicate variable '" + vars[i].name + "'");
    }
}

std::string System::location_name(std::span<const int> locations) const {
    std::string s;
    for (std::size_t p = 0; p < procs.size(); ++p) {
        if (p) s += '.';
        s += procs[p].locations[locations[p]];
    }
    return s;
}

namespace {

class Emitter {
public:
    Emitter(const System& sys, Program& prog) : sys_(sys), prog_(prog) {}

    void emit(const Expr& e) {
        using Op = Program::Op;
        switch (e.kind) {
        case Expr::Kind::Literal:
            push({Op::Push, e.value}, +1);
            return;
        case Expr::Kind::Name: {
            if (auto s = sys_.slot(e.name)) {
                push({Op::Load, *s}, +1);
                return;
            }
            if (auto it = sys_.constants.find(e.name); it != sys_.constants.end()) {
                push({Op::Push, it->second}, +1);
                return;
            }
            throw SpecError("unknown name '" + e.name + "' in " + prog_.text);
        }
        case Expr::Kind::Member:
            emit_member(e);
            return;
        case Expr::Kind::Unary:
            emit(*e.lhs);
            push({e.unary_op == UnaryOp::Neg ? Op::Neg : Op::Not}, 0);
            return;
        case Expr::Kind::Binary: {
            if (e.binary_op == BinaryOp::And || e.binary_op == BinaryOp::Or) {
                emit(*e.lhs);
                std::size_t jump = prog_.code.size();
                push({e.binary_op == BinaryOp::And ? Op::AndJump : Op::OrJump}, -1);
                emit(*e.rhs);
                push({Op::ToBool}, 0);
                prog_.code[jump].a = static_cast<std::int32_t>(prog_.code.size());
                return;
            }
            emit(*e.lhs);
            emit(*e.rhs);
            static constexpr Op ops[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Mod, Op::Lt, Op::Le,
                                         Op::Eq,  Op::Ne,  Op::Ge,  Op::Gt};
            push({ops[static_cast<int>(e.binary_op)]}, -1);
            return;
        }
        case Expr::Kind::Quant:
            throw SpecError("quantifier bounds must be constant in " + prog_.text);
        }
    }

private:
    void push(Program::Instr in, int delta) {
        prog_.code.push_back(in);
        cur_ += delta;
        prog_.depth = std::max(prog_.depth, cur_);
    }

    void emit_member(const Expr& e) {
        using Op = Program::Op;
        auto owner = member_owner(e);
        if (!owner) throw SpecError("agent index must be constant in " + prog_.text);
        std::vector<std::string> owners{*owner};
        if (!e.lhs) owners.push_back(*owner + "(1)");
        for (const auto& o : owners) {
            if (auto s = sys_.slot(o + "." + e.member)) {
                push({Op::Load, *s}, +1);
                return;
            }
        }
        for (const auto& o : owners) {
            for (std::size_t p = 0; p < sys_.procs.size(); ++p) {
                const Process& proc = sys_.procs[p];
                std::vector<std::uint8_t> table(proc.locations.size(), 0);
                bool found = false;
                if (proc.name == o) {
                    for (std::size_t l = 0; l < proc.locations.size(); ++l)
                        if (proc.locations[l] == e.member) table[l] = found = true;
                } else {
                    auto it = std::find(proc.components.begin(), proc.components.end(), o);
                    if (it == proc.components.end()) continue;
                    std::size_t k = static_cast<std::size_t>(it - proc.components.begin());
                    for (std::size_t l = 0; l < proc.locations.size(); ++l) {
                        // k-th dot-separated part of the tuple name
                        std::string_view name = proc.locations[l];
                        for (std::size_t skip = 0; skip < k; ++skip) name.remove_prefix(name.find('.') + 1);
                        name = name.substr(0, name.find('.'));
                        if (name == e.member) table[l] = found = true;
                    }
                    // An all-zero table is fine: the location may be structurally unreachable.
                    found = true;
                }
                if (!found) continue;
                prog_.tables.push_back(std::move(table));
                push({Op::Loc, static_cast<std::int32_t>(p), static_cast<std::int32_t>(prog_.tables.size() - 1)}, +1);
                return;
            }
        }
        throw SpecError("unknown variable or location '" + *owner + "." + e.member + "' in " + prog_.text);
    }

    const System& sys_;
    Program& prog_;
    int cur_ = 0;
};

Process make_process(const System& sys, const AgentGraph& g, std::string template_name) {
    Process p;
    p.name = g.name;
    p.template_name = std::move(template_name);
    p.components = g.components;
    for (const auto& l : g.locations) p.locations.push_back(l.name);
    p.initial = static_cast<int>(*g.location_index(g.initial));
    p.active.resize(p.locations.size());
    p.receives.assign(sys.channels.size(), std::vector<std::vector<int>>(p.locations.size()));
    for (const auto& e : g.edges) {
        if (!e.selects.empty()) throw SpecError(describe(g.name, e) + ": selects must be expanded first");
        CompiledEdge c;
        c.source = static_cast<int>(*g.location_index(e.source));
        c.target = static_cast<int>(*g.location_index(e.target));
        c.label = describe(g.name, e);
        c.guard = sys.compile(e.guard);
        for (const auto& u : e.updates) {
            auto s = sys.slot(u.target);
            if (!s) throw SpecError(c.label + ": unknown update target '" + u.target + "'");
            c.updates.emplace_back(*s, sys.compile(u.value));
        }
        int index = static_cast<int>(p.edges.size());
        if (e.sync) {
            auto it = std::find(sys.channels.begin(), sys.channels.end(), e.sync->channel);
            if (it == sys.channels.end()) throw SpecError(c.label + ": unknown channel");
            c.channel = static_cast<int>(it - sys.channels.begin());
            c.dir = e.sync->dir;
        }
        if (c.channel >= 0 && c.dir == SyncDir::Receive)
            p.receives[c.channel][c.source].push_back(index);
        else
            p.active[c.source].push_back(index);
        p.edges.push_back(std::move(c));
    }
    return p;
}

} // namespace

Program System::compile(const ExprPtr& e) const {
    Program prog;
    if (!e) return prog;
    prog.text = to_string(e);
    ExprPtr flat = unroll_quantifiers(fold(e, constants), constants);
    Emitter(*this, prog).emit(*flat);
    return prog;
}

System build_system(const MasTemplate& m) {
    if (is_combined(m)) return build_system(as_combined(m));
    validate(m);
    System sys;
    sys.constants = m.constant_map();
    sys.channels = m.channels;
    sys.vars = m.globals;
    auto agents = instantiate(m);
    for (const auto& a : agents) sys.vars.insert(sys.vars.end(), a.privates.begin(), a.privates.end());
    sys.index_slots();
    std::size_t next = 0;
    for (const auto& entry : m.templates)
        for (int k = 0; k < entry.count; ++k) sys.procs.push_back(make_process(sys, agents[next++], entry.graph.name));
    return sys;
}

System build_system(const CombinedGraph& c) {
    System sys;
    sys.constants = {c.constants.begin(), c.constants.end()};
    sys.vars = c.variables;
    sys.index_slots();
    sys.procs.push_back(make_process(sys, c.graph, ""));
    return sys;
}

StateCodec::StateCodec(const System& sys) {
    auto width = [](std::size_t range) -> std::uint8_t {
        if (range <= 0x100) return 1;
        if (range <= 0x10000) return 2;
        return 4;
    };
    for (const auto& p : sys.procs) {
        auto w = width(p.locations.size());
        loc_fields_.push_back({bytes_, w, 0});
        bytes_ += w;
    }
    for (const auto& v : sys.vars) {
        auto w = width(static_cast<std::size_t>(v.size()));
        var_fields_.push_back({bytes_, w, v.lo});
        bytes_ += w;
    }
    if (bytes_ == 0) bytes_ = 1;
}

namespace {

inline void put(std::uint8_t* out, std::uint8_t width, std::uint32_t v) {
    switch (width) {
    case 1: out[0] = static_cast<std::uint8_t>(v); break;
    case 2: {
        auto x = static_cast<std::uint16_t>(v);
        std::memcpy(out, &x, 2);
        break;
    }
    default: std::memcpy(out, &v, 4);
    }
}

inline std::uint32_t get(const std::uint8_t* in, std::uint8_t width) {
    switch (width) {
    case 1: return in[0];
    case 2: {
        std::uint16_t x;
        std::memcpy(&x, in, 2);
        return x;
    }
    default: {
        std::uint32_t x;
        std::memcpy(&x, in, 4);
        return x;
    }
    }
}

} // namespace

void StateCodec::encode(std::span<const int> locations, std::span<const int> values, std::uint8_t* out) const {
    if (loc_fields_.empty() && var_fields_.empty()) out[0] = 0;
    for (std::size_t i = 0; i < loc_fields_.size(); ++i)
        put(out + loc_fields_[i].offset, loc_fields_[i].width, static_cast<std::uint32_t>(locations[i]));
    for (std::size_t i = 0; i < var_fields_.size(); ++i)
        put(out + var_fields_[i].offset, var_fields_[i].width,
            static_cast<std::uint32_t>(values[i] - var_fields_[i].base));
}

void StateCodec::decode(const std::uint8_t* in, std::span<int> locations, std::span<int> values) const {
    for (std::size_t i = 0; i < loc_fields_.size(); ++i)
        locations[i] = static_cast<int>(get(in + loc_fields_[i].offset, loc_fields_[i].width));
    for (std::size_t i = 0; i < var_fields_.size(); ++i)
        values[i] = static_cast<int>(get(in + var_fields_[i].offset, var_fields_[i].width)) + var_fields_[i].base;
}

} // namespace mabs
