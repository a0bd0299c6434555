#pragma once

#include "mabs/model.hpp"

#include <string>
#include <string_view>

namespace mabs {

/// Reads the supported Uppaal XML subset (see docs/format.md). Constants are
/// substituted where a literal is required (select bounds, ranges, instance counts).
/// Errors carry the template and transition they refer to.
MasTemplate parse_model(std::string_view xml);

/// Deterministic XML output; `parse_model(serialize_model(m)) == m`.
std::string serialize_model(const MasTemplate& m);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace mabs
