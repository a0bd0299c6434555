#pragma once

#include "mabs/model.hpp"
#include "mabs/unfold.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mabs {

/// Stack-machine form of an expression with names resolved to variable slots.
class Program {
public:
    enum class Op : std::uint8_t {
        Push, Load, Loc, Neg, Not, ToBool,
        Add, Sub, Mul, Div, Mod, Lt, Le, Eq, Ne, Ge, Gt,
        AndJump, OrJump,  // short-circuit: pop, maybe push result and jump
    };
    struct Instr {
        Op op;
        std::int32_t a = 0;
        std::int32_t b = 0;
    };

    std::vector<Instr> code;
    std::vector<std::vector<std::uint8_t>> tables;  // location membership per Loc instruction
    std::string text;                               // source form, for diagnostics
    int depth = 0;

    bool empty() const { return code.empty(); }
    /// Throws EvalError on division by zero or 16-bit overflow.
    int run(std::span<const int> values, std::span<const int> locations) const;
};

struct CompiledEdge {
    int source = 0;
    int target = 0;
    Program guard;  // empty: always enabled
    std::vector<std::pair<int, Program>> updates;
    int channel = -1;
    SyncDir dir = SyncDir::Send;
    std::string label;
};

struct Process {
    std::string name;
    std::string template_name;  // empty for combined graphs
    std::vector<std::string> locations;
    int initial = 0;
    std::vector<CompiledEdge> edges;
    std::vector<std::vector<int>> active;                 // per location: internal and send edges
    std::vector<std::vector<std::vector<int>>> receives;  // [channel][location]
    std::vector<std::string> components;                  // combined graphs only
};

/// A flat, fully instantiated network ready for exploration.
class System {
public:
    std::vector<VarDecl> vars;
    std::vector<Process> procs;
    std::vector<std::string> channels;
    std::map<std::string, int> constants;

    std::optional<int> slot(std::string_view name) const;

    /// Compiles a proposition or guard. Location predicates `Agent(k).loc` are allowed;
    /// quantifiers must have constant bounds.
    Program compile(const ExprPtr& e) const;

    /// Dot-joined tuple of all process locations.
    std::string location_name(std::span<const int> locations) const;

private:
    friend System build_system(const MasTemplate&);
    friend System build_system(const CombinedGraph&);
    void index_slots();
    std::map<std::string, int, std::less<>> slots_;
};

System build_system(const MasTemplate& m);
System build_system(const CombinedGraph& c);

/// Packs (locations, valuation) into a fixed-width byte string, each field stored as
/// an offset from its lower bound in 1, 2 or 4 bytes.
class StateCodec {
public:
    explicit StateCodec(const System& sys);

    std::size_t size() const { return bytes_; }
    void encode(std::span<const int> locations, std::span<const int> values, std::uint8_t* out) const;
    void decode(const std::uint8_t* in, std::span<int> locations, std::span<int> values) const;

private:
    struct Field {
        std::size_t offset;
        std::uint8_t width;
        int base;
    };
    std::vector<Field> loc_fields_;
    std::vector<Field> var_fields_;
    std::size_t bytes_ = 0;
};

} // namespace mabs
