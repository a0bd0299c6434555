#include "mabs/domain.hpp"

#include "mabs/error.hpp"

#include <algorithm>
#include "json.hpp"

namespace mabs {

std::string_view to_string(DomainTag t) {
    switch (t) {
    case DomainTag::Upper: return "upper";
    case DomainTag::Lower: return "lower";
    case DomainTag::Exact: return "exact";
    }
    return "upper";
}

DomainTag parse_domain_tag(std::string_view text) {
    if (text == "upper") return DomainTag::Upper;
    if (text == "lower") return DomainTag::Lower;
    if (text == "exact") return DomainTag::Exact;
    throw FormatError("domain tag must be 'upper' or 'lower', got '" + std::string(text) + "'");
}

const std::set<ValueVector>& LocalDomain::at(const std::string& location) const {
    static const std::set<ValueVector> empty;
    auto it = entries.find(location);
    return it == entries.end() ? empty : it->second;
}

std::size_t LocalDomain::total() const {
    std::size_t n = 0;
    for (const auto& [_, s] : entries) n += s.size();
    return n;
}

bool subset(const LocalDomain& a, const LocalDomain& b) {
    for (const auto& [loc, vs] : a.entries) {
        const auto& other = b.at(loc);
        if (!std::includes(other.begin(), other.end(), vs.begin(), vs.end())) return false;
    }
    return true;
}

std::string write_domain(const LocalDomain& d) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["variables"] = d.variables;
    j["tag"] = std::string(to_string(d.tag));
    j["target"] = d.target;
    ordered_json entries = ordered_json::object();
    for (const auto& [loc, vs] : d.entries) {
        ordered_json arr = ordered_json::array();
        for (const auto& v : vs) arr.push_back(v);
        entries[loc] = std::move(arr);
    }
    j["entries"] = std::move(entries);
    return j.dump(2) + "\n";
}

LocalDomain read_domain(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("domain file: ") + e.what());
    }
    if (!j.is_object()) throw FormatError("domain file: top level must be an object");
    LocalDomain d;
    try {
        d.variables = j.at("variables").get<std::vector<std::string>>();
        d.tag = parse_domain_tag(j.at("tag").get<std::string>());
        d.target = j.value("target", std::string(kExtTarget));
        const auto& entries = j.at("entries");
        if (!entries.is_object()) throw FormatError("domain file: 'entries' must be an object");
        for (const auto& [loc, arr] : entries.items()) {
            if (!arr.is_array()) throw FormatError("domain file: entry '" + loc + "' must be an array");
            auto& out = d.entries[loc];
            for (const auto& v : arr) {
                auto vec = v.get<ValueVector>();
                if (vec.size() != d.variables.size())
                    throw FormatError("domain file: vector of length " + std::to_string(vec.size()) + " at '" + loc +
                                      "', expected " + std::to_string(d.variables.size()));
                out.insert(std::move(vec));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("domain file: ") + e.what());
    }
    return d;
}

} // namespace mabs
