#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mabs {

enum class DomainTag : std::uint8_t { Upper, Lower, Exact };

std::string_view to_string(DomainTag t);
DomainTag parse_domain_tag(std::string_view text);  // throws FormatError

using ValueVector = std::vector<int>;

/// Reachable value vectors over `variables`, per location of `target`.
/// Locations are template location names, or dot-joined tuples for target "ext".
struct LocalDomain {
    std::vector<std::string> variables;
    DomainTag tag = DomainTag::Upper;
    std::string target;
    std::map<std::string, std::set<ValueVector>> entries;

    const std::set<ValueVector>& at(const std::string& location) const;
    std::size_t total() const;
    bool operator==(const LocalDomain&) const = default;
};

inline constexpr std::string_view kExtTarget = "ext";

/// True iff every entry of `a` is a subset of the matching entry of `b`.
bool subset(const LocalDomain& a, const LocalDomain& b);

std::string write_domain(const LocalDomain& d);
LocalDomain read_domain(std::string_view json);

} // namespace mabs
