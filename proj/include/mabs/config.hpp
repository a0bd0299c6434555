#pragma once

#include "mabs/domain.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mabs {

struct MergeSpec {
    std::string name;
    int initial = 0;
    std::string expr;  // expression text over removed variables
    bool operator==(const MergeSpec&) const = default;
};

/// Flat `key = value` settings shared by the CLI commands. Lists are comma-separated.
struct Config {
    std::string input;
    std::string output;
    std::string target;                      // template name or "ext"
    std::vector<std::string> variables;
    std::optional<DomainTag> type;           // upper or lower
    std::vector<std::string> scope;          // empty: every location
    std::optional<MergeSpec> merge;
    std::string domain;                      // domain file path
    std::vector<std::string> always_available;  // channels assumed enabled for lower approximations
    std::optional<std::uint64_t> cap;
    std::optional<unsigned> threads;
    std::string query;
    bool operator==(const Config&) const = default;
};

/// Unknown keys are skipped and reported through `warnings`; malformed values throw FormatError.
Config read_config(std::string_view text, std::vector<std::string>* warnings = nullptr);
std::string write_config(const Config& c);

/// Sets one key from its text form, with the same validation as read_config.
/// Returns false for an unknown key.
bool set_config_value(Config& c, std::string_view key, std::string_view value);

} // namespace mabs
