#include "mabs/model_io.hpp"

#include "mabs/error.hpp"
#include "mabs/parser.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace mabs {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kComponentsPragma = "// components:";

template <class F>
auto in_context(const std::string& ctx, F&& f) {
    try {
        return f();
    } catch (const UnsupportedFeature& e) {
        throw UnsupportedFeature(ctx + ": " + e.what());
    } catch (const ParseError& e) {
        throw ParseError(ctx + ": " + e.what());
    } catch (const SpecError& e) {
        throw SpecError(ctx + ": " + e.what());
    }
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<std::string> attr(const pt::ptree& node, const std::string& key) {
    if (auto a = node.get_child_optional("<xmlattr>." + key)) return a->data();
    return std::nullopt;
}

std::optional<int> int_attr(const pt::ptree& node, const std::string& key) {
    auto a = attr(node, key);
    if (!a) return std::nullopt;
    try {
        return std::stoi(*a);
    } catch (const std::exception&) {
        throw ParseError("attribute " + key + "=\"" + *a + "\" is not an integer");
    }
}

std::vector<std::string> read_components(const std::string& decl) {
    std::vector<std::string> out;
    std::istringstream lines(decl);
    std::string line;
    while (std::getline(lines, line)) {
        auto t = trim(line);
        if (t.rfind(kComponentsPragma, 0) != 0) continue;
        std::istringstream words(t.substr(kComponentsPragma.size()));
        std::string w;
        while (words >> w) out.push_back(w);
    }
    return out;
}

/// Instance count from `const int[1,N] id` (or no parameter at all).
int parse_parameter(const std::string& text, const std::map<std::string, int>& constants) {
    auto t = trim(text);
    if (t.empty()) return 1;
    std::string body = t;
    if (body.rfind("const", 0) == 0) body = trim(body.substr(5));
    if (body.rfind("int", 0) != 0 || body.find('[') == std::string::npos)
        throw UnsupportedFeature("template parameter '" + t + "' (only 'const int[1,N] id' is supported)");
    auto open = body.find('[');
    auto close = body.find(']');
    auto comma = body.find(',', open);
    if (close == std::string::npos || comma == std::string::npos || comma > close)
        throw ParseError("malformed template parameter '" + t + "'");
    auto name = trim(body.substr(close + 1));
    if (name != "id") throw UnsupportedFeature("template parameter '" + name + "' (only 'id' is supported)");
    auto bound = [&](std::string_view s) {
        auto v = literal_value(fold(parse_expr(s), constants));
        if (!v) throw SpecError("template parameter bound '" + std::string(s) + "' is not constant");
        return *v;
    };
    int lo = bound(body.substr(open + 1, comma - open - 1));
    int hi = bound(body.substr(comma + 1, close - comma - 1));
    if (lo != 1) throw UnsupportedFeature("id ranges must start at 1");
    return hi;
}

std::vector<std::string> parse_system_line(const std::string& text) {
    // Strip comments, then expect exactly one `system A, B, ...;` statement.
    std::string clean;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text.compare(i, 2, "//") == 0) {
            while (i < text.size() && text[i] != '\n') ++i;
            clean += '\n';
        } else if (text.compare(i, 2, "/*") == 0) {
            auto end = text.find("*/", i + 2);
            i = end == std::string::npos ? text.size() : end + 1;
            clean += ' ';
        } else {
            clean += text[i];
        }
    }
    auto t = trim(clean);
    if (t.rfind("system", 0) != 0)
        throw UnsupportedFeature("system section must consist of a single 'system ...;' line");
    auto semi = t.find(';');
    if (semi == std::string::npos) throw ParseError("system line is missing ';'");
    if (!trim(t.substr(semi + 1)).empty()) throw UnsupportedFeature("statements after the system line");
    std::string list = t.substr(6, semi - 6);
    std::vector<std::string> names;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto n = trim(item);
        if (n.empty()) continue;
        for (char c : n)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
                throw UnsupportedFeature("system entry '" + n + "' (only template names are supported)");
        names.push_back(n);
    }
    return names;
}

AgentGraph parse_template(const pt::ptree& node, const std::map<std::string, int>& global_constants, int& count) {
    AgentGraph g;
    g.name = trim(node.get<std::string>("name", ""));
    if (g.name.empty()) throw ParseError("template without a name");

    return in_context("template " + g.name, [&] {
        count = parse_parameter(node.get<std::string>("parameter", ""), global_constants);
        std::string decl = node.get<std::string>("declaration", "");
        g.components = read_components(decl);
        Declarations d = parse_declarations(decl, VarKind::Private, global_constants);
        if (!d.channels.empty()) throw UnsupportedFeature("template-local channels");
        g.privates = d.vars;
        g.constants = d.constants;
        std::map<std::string, int> constants = global_constants;
        for (const auto& [n, v] : d.constants) constants[n] = v;

        std::map<std::string, std::string> by_id;
        std::optional<std::string> init_ref;
        int transition_no = 0;
        for (const auto& [key, child] : node) {
            if (key == "<xmlattr>" || key == "<xmlcomment>" || key == "name" || key == "parameter" ||
                key == "declaration")
                continue;
            if (key == "location") {
                auto id = attr(child, "id");
                if (!id) throw ParseError("location without id");
                Location loc;
                loc.name = trim(child.get<std::string>("name", ""));
                if (loc.name.empty()) loc.name = *id;
                auto x = int_attr(child, "x");
                auto y = int_attr(child, "y");
                if (x && y) loc.position = std::make_pair(*x, *y);
                for (const auto& [ck, cv] : child) {
                    if (ck == "committed" || ck == "urgent")
                        throw UnsupportedFeature(ck + " location '" + loc.name + "'");
                    if (ck == "label") {
                        auto kind = attr(cv, "kind").value_or("");
                        if (kind != "comments")
                            throw UnsupportedFeature("location label kind '" + kind + "' at '" + loc.name + "'");
                    }
                }
                by_id[*id] = loc.name;
                g.locations.push_back(std::move(loc));
            } else if (key == "init") {
                init_ref = attr(child, "ref");
            } else if (key == "branchpoint") {
                throw UnsupportedFeature("branchpoints");
            } else if (key == "transition") {
                ++transition_no;
                in_context("transition " + std::to_string(transition_no), [&] {
                    Edge e;
                    auto src = child.get_optional<std::string>("source.<xmlattr>.ref");
                    auto dst = child.get_optional<std::string>("target.<xmlattr>.ref");
                    if (!src || !dst || !by_id.count(*src) || !by_id.count(*dst))
                        throw SpecError("transition endpoint does not name a location");
                    e.source = by_id[*src];
                    e.target = by_id[*dst];
                    for (const auto& [lk, lv] : child) {
                        if (lk != "label") continue;
                        auto kind = attr(lv, "kind").value_or("");
                        std::string text = trim(lv.data());
                        if (kind == "select")
                            e.selects = parse_selects(text, constants);
                        else if (kind == "guard")
                            e.guard = text.empty() ? nullptr : parse_expr(text);
                        else if (kind == "synchronisation")
                            e.sync = text.empty() ? std::nullopt : std::optional<Sync>(parse_sync(text));
                        else if (kind == "assignment")
                            e.updates = parse_updates(text);
                        else if (kind != "comments")
                            throw UnsupportedFeature("transition label kind '" + kind + "'");
                    }
                    g.edges.push_back(std::move(e));
                    return 0;
                });
            } else {
                throw UnsupportedFeature("template element <" + key + ">");
            }
        }
        if (!init_ref || !by_id.count(*init_ref)) throw SpecError("missing or dangling <init>");
        g.initial = by_id[*init_ref];
        return g;
    });
}

// --- writing ---------------------------------------------------------------------------

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void write_decls(std::string& out, const std::vector<std::pair<std::string, int>>& constants,
                 const std::vector<std::string>& channels, const std::vector<VarDecl>& vars) {
    for (const auto& [n, v] : constants) out += "const int " + n + " = " + std::to_string(v) + ";\n";
    for (const auto& c : channels) out += "chan " + c + ";\n";
    for (const auto& v : vars)
        out += "int[" + std::to_string(v.lo) + "," + std::to_string(v.hi) + "] " + v.name + " = " +
               std::to_string(v.initial) + ";\n";
}

} // namespace

MasTemplate parse_model(std::string_view xml) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw ParseError(std::string("malformed XML: ") + e.what());
    }
    auto nta = tree.get_child_optional("nta");
    if (!nta) throw ParseError("missing <nta> root element");

    MasTemplate m;
    std::map<std::string, int> constants;
    std::vector<std::pair<AgentGraph, int>> templates;
    std::optional<std::vector<std::string>> system;

    for (const auto& [key, child] : *nta) {
        if (key == "declaration") {
            Declarations d = in_context("global declarations", [&] {
                return parse_declarations(child.data(), VarKind::Global, constants);
            });
            for (const auto& c : d.constants) {
                constants[c.first] = c.second;
                m.constants.push_back(c);
            }
            m.globals.insert(m.globals.end(), d.vars.begin(), d.vars.end());
            m.channels.insert(m.channels.end(), d.channels.begin(), d.channels.end());
        } else if (key == "template") {
            int count = 1;
            AgentGraph g = parse_template(child, constants, count);
            templates.emplace_back(std::move(g), count);
        } else if (key == "system") {
            system = in_context("system", [&] { return parse_system_line(child.data()); });
        } else if (key == "queries" || key == "<xmlcomment>" || key == "<xmlattr>") {
            continue;
        } else if (key == "instantiation") {
            if (!trim(child.data()).empty()) throw UnsupportedFeature("<instantiation> section");
        } else {
            throw UnsupportedFeature("document element <" + key + ">");
        }
    }
    if (!system) throw ParseError("missing <system> element");

    std::set<std::string> seen;
    for (const auto& name : *system) {
        if (!seen.insert(name).second) throw SpecError("system line lists '" + name + "' twice");
        auto it = std::find_if(templates.begin(), templates.end(), [&](const auto& t) { return t.first.name == name; });
        if (it == templates.end()) throw SpecError("system line names unknown template '" + name + "'");
        m.templates.push_back({it->first, it->second});
    }
    validate(m);
    return m;
}

std::string serialize_model(const MasTemplate& m) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
    out += "<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' "
           "'http://www.it.uu.se/research/group/darts/uppaal/flat-1_2.dtd'>\n";
    out += "<nta>\n";
    std::string decls;
    write_decls(decls, m.constants, m.channels, m.globals);
    out += "\t<declaration>" + escape(decls) + "</declaration>\n";

    int next_id = 0;
    for (const auto& entry : m.templates) {
        const auto& g = entry.graph;
        out += "\t<template>\n";
        out += "\t\t<name>" + escape(g.name) + "</name>\n";
        out += "\t\t<parameter>const int[1," + std::to_string(entry.count) + "] id</parameter>\n";
        std::string local;
        if (!g.components.empty()) {
            local += std::string(kComponentsPragma);
            for (const auto& c : g.components) local += " " + c;
            local += "\n";
        }
        write_decls(local, g.constants, {}, g.privates);
        out += "\t\t<declaration>" + escape(local) + "</declaration>\n";

        std::map<std::string, std::string> ids;
        for (const auto& loc : g.locations) {
            std::string id = "id" + std::to_string(next_id++);
            ids[loc.name] = id;
            out += "\t\t<location id=\"" + id + "\"";
            if (loc.position)
                out += " x=\"" + std::to_string(loc.position->first) + "\" y=\"" +
                       std::to_string(loc.position->second) + "\"";
            out += ">\n\t\t\t<name>" + escape(loc.name) + "</name>\n\t\t</location>\n";
        }
        out += "\t\t<init ref=\"" + ids.at(g.initial) + "\"/>\n";
        for (const auto& e : g.edges) {
            out += "\t\t<transition>\n";
            out += "\t\t\t<source ref=\"" + ids.at(e.source) + "\"/>\n";
            out += "\t\t\t<target ref=\"" + ids.at(e.target) + "\"/>\n";
            auto label = [&](std::string_view kind, const std::string& text) {
                out += "\t\t\t<label kind=\"" + std::string(kind) + "\">" + escape(text) + "</label>\n";
            };
            if (!e.selects.empty()) label("select", to_string(e.selects));
            if (e.guard) label("guard", to_string(e.guard));
            if (e.sync) label("synchronisation", to_string(*e.sync));
            if (!e.updates.empty()) label("assignment", to_string(e.updates));
            out += "\t\t</transition>\n";
        }
        out += "\t</template>\n";
    }
    out += "\t<system>system";
    for (std::size_t i = 0; i < m.templates.size(); ++i)
        out += (i ? ", " : " ") + escape(m.templates[i].graph.name);
    out += ";</system>\n";
    out += "</nta>\n";
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << contents;
    if (!out) throw Error("failed writing '" + path + "'");
}

} // namespace mabs
