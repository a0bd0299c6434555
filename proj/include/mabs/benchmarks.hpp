#pragma once

#include "mabs/abstractor.hpp"
#include "mabs/checker.hpp"
#include "mabs/model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mabs {

/// NV voters choosing among NC candidates and one election authority.
MasTemplate build_postal(int nv, int nc);

/// NAg honest AI agents on a ring plus one impersonating attacker.
MasTemplate build_social_ai(int nag);

inline constexpr std::string_view kBallotStuffing = "A[](b_recv<=ep_sent && ep_sent<=NV)";
inline constexpr std::string_view kCompromised =
    "A[](exists(i:int[1,NA])(impersonated!=i && (!AI(i).wait || AI(i).mqual<2)))";

/// One abstraction stage: the domain is computed with `approximate` and fed to `abstract`.
struct AbstractionStep {
    MappingFunction mapping;
    DomainTag tag = DomainTag::Upper;
};

/// "A1", "A2" or "A3" for the postal family; "mqual" for social AI.
std::vector<AbstractionStep> benchmark_abstraction(std::string_view name);

/// Runs the steps in order. Warnings are appended when `warnings` is given.
MasTemplate apply_steps(const MasTemplate& m, const std::vector<AbstractionStep>& steps,
                        std::vector<std::string>* warnings = nullptr);

struct BenchRow {
    std::string family;  // "postal" or "social"
    int param = 0;       // NV or NAg
    std::string config;  // "concrete", "A1", ...
    std::uint64_t states = 0;
    std::uint64_t transitions = 0;
    double time_ms = 0;  // abstraction plus checking
    Verdict verdict = Verdict::Inconclusive;
    std::optional<double> published_states;
};

struct BenchOptions {
    int from = 1;
    int to = 3;
    int nc = 3;
    ExploreOptions explore;
    unsigned grid_threads = 1;  // grid points checked concurrently
};

std::vector<BenchRow> run_postal(const BenchOptions& opts);
std::vector<BenchRow> run_social(const BenchOptions& opts);

/// Aligned `#St | t` table with a second table comparing against published state counts.
std::string format_table(const std::vector<BenchRow>& rows);
/// One JSON object per row: {family, params, config, states, time_ms, verdict, ...}.
std::string format_json_lines(const std::vector<BenchRow>& rows);

/// Reduction in percent, (1 - abstract/concrete) * 100.
double reduction(std::uint64_t concrete, std::uint64_t abstract);

} // namespace mabs
