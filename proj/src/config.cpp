#include "mabs/config.hpp"

#include "mabs/error.hpp"

#include <charconv>
#include <sstream>

namespace mabs {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
    T x{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw FormatError("config: '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
    return x;
}

std::string join(const std::vector<std::string>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
    return s;
}

MergeSpec& merge_of(Config& c) {
    if (!c.merge) c.merge = MergeSpec{};
    return *c.merge;
}

} // namespace

bool set_config_value(Config& c, std::string_view key, std::string_view raw) {
    std::string v = trim(raw);
    if (key == "input") c.input = v;
    else if (key == "output") c.output = v;
    else if (key == "target") c.target = v;
    else if (key == "variables") c.variables = split_list(v);
    else if (key == "type") {
        if (v != "upper" && v != "lower")
            throw FormatError("config: 'type' must be 'upper' or 'lower', got '" + v + "'");
        c.type = parse_domain_tag(v);
    } else if (key == "scope") c.scope = split_list(v);
    else if (key == "merge.name") merge_of(c).name = v;
    else if (key == "merge.initial") merge_of(c).initial = parse_number<int>(key, v);
    else if (key == "merge.expr") merge_of(c).expr = v;
    else if (key == "domain") c.domain = v;
    else if (key == "always_available") c.always_available = split_list(v);
    else if (key == "cap") {
        auto n = parse_number<std::uint64_t>(key, v);
        if (n == 0) throw FormatError("config: 'cap' must be positive");
        c.cap = n;
    } else if (key == "threads") {
        auto n = parse_number<unsigned>(key, v);
        if (n == 0) throw FormatError("config: 'threads' must be positive");
        c.threads = n;
    } else if (key == "query") c.query = v;
    else return false;
    return true;
}

Config read_config(std::string_view text, std::vector<std::string>* warnings) {
    Config c;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(std::string_view(t).substr(0, eq));
        if (!set_config_value(c, key, std::string_view(t).substr(eq + 1)) && warnings)
            warnings->push_back("config line " + std::to_string(lineno) + ": unknown key '" + key + "' ignored");
    }
    if (c.merge && (c.merge->name.empty() || c.merge->expr.empty()))
        throw FormatError("config: merge needs both 'merge.name' and 'merge.expr'");
    return c;
}

std::string write_config(const Config& c) {
    std::ostringstream out;
    auto put = [&](std::string_view k, const std::string& v) {
        if (!v.empty()) out << k << " = " << v << "\n";
    };
    put("input", c.input);
    put("output", c.output);
    put("target", c.target);
    put("variables", join(c.variables));
    if (c.type) put("type", std::string(to_string(*c.type)));
    put("scope", join(c.scope));
    if (c.merge) {
        put("merge.name", c.merge->name);
        out << "merge.initial = " << c.merge->initial << "\n";
        put("merge.expr", c.merge->expr);
    }
    put("domain", c.domain);
    put("always_available", join(c.always_available));
    if (c.cap) out << "cap = " << *c.cap << "\n";
    if (c.threads) out << "threads = " << *c.threads << "\n";
    put("query", c.query);
    return out.str();
}

} // namespace mabs
