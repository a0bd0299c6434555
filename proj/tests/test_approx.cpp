#include "doctest.h"
#include "oracles.hpp"

#include "mabs/approx.hpp"
#include "mabs/checker.hpp"
#include "mabs/error.hpp"
#include "mabs/model_io.hpp"
#include "mabs/unfold.hpp"

using namespace mabs;

namespace {

MasTemplate voter() { return parse_model(read_file(std::string(TEST_DATA_DIR) + "/voter.xml")); }

MasTemplate two_agents(const std::string& globals, const std::string& a_edges, const std::string& b_edges) {
    auto tpl = [](const std::string& name, const std::string& edges) {
        return "<template><name>" + name + "</name><location id=\"" + name + "0\"><name>l0</name></location>" +
               "<location id=\"" + name + "1\"><name>l1</name></location><location id=\"" + name +
               "2\"><name>l2</name></location><init ref=\"" + name + "0\"/>" + edges + "</template>";
    };
    return parse_model("<nta><declaration>" + globals + "</declaration>" + tpl("A", a_edges) + tpl("B", b_edges) +
                       "<system>system A, B;</system></nta>");
}

std::string tr(const std::string& owner, int a, int b, const std::string& guard, const std::string& upd,
               const std::string& sync = "") {
    std::string x = "<transition><source ref=\"" + owner + std::to_string(a) + "\"/><target ref=\"" + owner +
                    std::to_string(b) + "\"/>";
    if (!guard.empty()) x += "<label kind=\"guard\">" + guard + "</label>";
    if (!sync.empty()) x += "<label kind=\"synchronisation\">" + sync + "</label>";
    if (!upd.empty()) x += "<label kind=\"assignment\">" + upd + "</label>";
    return x + "</transition>";
}

} // namespace

TEST_SUITE("approx") {

TEST_CASE("voter upper domain equals the exact projection") {
    MasTemplate m = voter();
    LocalDomain up = approx_upper(m, "Voter", {"mem_dec"});
    LocalDomain exact = project_reachable(build_system(m), "Voter", {"mem_dec"});
    CHECK(up.entries == exact.entries);
    CHECK(up.at("idle") == std::set<ValueVector>{{0}});
    CHECK(up.at("waits") == std::set<ValueVector>{{1}, {2}});
    CHECK(up.at("voted") == std::set<ValueVector>{{1}, {2}});
    CHECK(up.tag == DomainTag::Upper);
    CHECK(up.target == "Voter");
}

TEST_CASE("unassigned variable keeps its initial value") {
    MasTemplate m = voter();
    m.templates[0].graph.privates.push_back({"z", 0, 3, 2, VarKind::Private});
    LocalDomain up = approx_upper(m, "Voter", {"z"});
    for (const auto& [loc, vs] : up.entries) CHECK(vs == std::set<ValueVector>{{2}});
}

TEST_CASE("constant updates on unguarded edges give lower = upper = exact") {
    MasTemplate m = two_agents("int[0,3] x = 0;", tr("A", 0, 1, "", "x = 1") + tr("A", 1, 2, "", "x = 3") +
                                                      tr("A", 0, 2, "", "x = 2"), "");
    LocalDomain lo = approx_lower(m, "A", {"x"});
    LocalDomain up = approx_upper(m, "A", {"x"});
    CHECK(lo.entries == up.entries);
    CHECK(up.entries == project_reachable(build_system(m), "A", {"x"}).entries);
}

TEST_CASE("guard over an unknown variable separates lower from upper") {
    // x in V; y outside V decides whether A may move to l1.
    MasTemplate m = two_agents("int[0,1] x = 0; int[0,1] y = 0;",
                               tr("A", 0, 1, "y == 1", "x = 1"), tr("B", 0, 1, "", "y = 1"));
    LocalDomain lo = approx_lower(m, kExtTarget.data(), {"x"});
    LocalDomain lo_t = approx_lower(m, "A", {"x"});
    LocalDomain up = approx_upper(m, "A", {"x"});
    LocalDomain exact = project_reachable(build_system(m), "A", {"x"});
    CHECK(up.at("l1") == std::set<ValueVector>{{1}});
    CHECK(exact.at("l1") == std::set<ValueVector>{{1}});
    CHECK(lo_t.at("l1").empty());
    CHECK(lo.total() >= 1);
    CHECK(subset(lo_t, exact));
    CHECK(subset(exact, up));
}

TEST_CASE("template sync edges: partner assumed for upper, not for lower unless declared") {
    MasTemplate m = two_agents("chan c; int[0,2] x = 0;", tr("A", 0, 1, "", "x = 2", "c?"), tr("B", 0, 1, "", "", "c!"));
    CHECK(approx_upper(m, "A", {"x"}).at("l1") == std::set<ValueVector>{{2}});
    CHECK(approx_lower(m, "A", {"x"}).at("l1").empty());
    ApproxOptions o;
    o.always_available = {"c"};
    CHECK(approx_lower(m, "A", {"x"}, o).at("l1") == std::set<ValueVector>{{2}});
}

TEST_CASE("every location appears in the result") {
    MasTemplate m = two_agents("int[0,1] x = 0;", tr("A", 0, 1, "x == 1", ""), "");
    LocalDomain up = approx_upper(m, "A", {"x"});
    CHECK(up.entries.size() == 3);
    CHECK(up.at("l2").empty());
}

TEST_CASE("invalid requests") {
    MasTemplate m = voter();
    CHECK_THROWS_AS(approx_upper(m, "Voter", {}), SpecError);
    CHECK_THROWS_AS(approx_upper(m, "Voter", {"nope"}), SpecError);
    CHECK_THROWS_AS(approx_upper(m, "Voter", {"id"}), SpecError);
    CHECK_THROWS_AS(approx_upper(m, "Nobody", {"mem_dec"}), SpecError);
    CHECK_THROWS_AS(approx_upper(m, "Voter", {"mem_dec", "mem_dec"}), SpecError);
    CHECK_THROWS_AS(approximate(m, "Voter", {"mem_dec"}, DomainTag::Exact), SpecError);
    MasTemplate shared = two_agents("int[0,1] g = 0;", tr("A", 0, 1, "", "g = 1"), tr("B", 0, 1, "g == 1", ""));
    CHECK_THROWS_AS(approx_upper(shared, "A", {"g"}), SpecError);
    CHECK_NOTHROW(approx_upper(shared, kExtTarget.data(), {"g"}));
}

TEST_CASE("vector cap raises a resource error") {
    MasTemplate m = voter();
    ApproxOptions o;
    o.vector_cap = 3;
    CHECK_THROWS_AS(approx_upper(m, "Voter", {"mem_dec"}, o), ResourceError);
}

TEST_CASE("completion cap keeps upper sound and lower empty") {
    MasTemplate m = two_agents("int[0,100] y = 0; int[0,100] w = 0; int[0,3] x = 0;",
                               tr("A", 0, 1, "y + w &gt; 5", "x = 1"), tr("B", 0, 1, "", "y = 50, w = 50"));
    ApproxOptions o;
    o.completion_cap = 100;
    CHECK(approx_upper(m, "A", {"x"}, o).at("l1") == std::set<ValueVector>{{1}});
    CHECK(approx_lower(m, "A", {"x"}, o).at("l1").empty());
}

TEST_CASE("sandwich on random models") {
    for (std::uint64_t seed = 500; seed < 600; ++seed) {
        CAPTURE(seed);
        MasTemplate m = testing::random_model(seed);
        for (const auto& entry : m.templates) {
            auto vars = testing::removable(m, entry.graph.name);
            if (!vars.empty()) CHECK(testing::check_sandwich(m, entry.graph.name, vars).empty());
        }
        CHECK(testing::check_sandwich(m, kExtTarget.data(), testing::removable(m, kExtTarget.data())).empty());
    }
}

TEST_CASE("combined upper is within template upper") {
    int compared = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        MasTemplate m = testing::random_model(seed);
        for (std::size_t t = 0; t < m.templates.size(); ++t) {
            const auto& entry = m.templates[t];
            if (entry.count != 1) continue;
            auto vars = testing::removable(m, entry.graph.name);
            if (vars.empty()) continue;
            CAPTURE(seed);
            std::vector<std::string> qualified;
            for (const auto& v : vars)
                qualified.push_back(entry.graph.find_private(v) ? instance_name(entry.graph.name, 1) + "." + v : v);
            LocalDomain tl = approx_upper(m, entry.graph.name, vars);
            LocalDomain ext = approx_upper(m, kExtTarget.data(), qualified);
            CombinedGraph c = combine(m);
            auto k = static_cast<std::size_t>(std::find(c.graph.components.begin(), c.graph.components.end(),
                                                        instance_name(entry.graph.name, 1)) -
                                              c.graph.components.begin());
            for (const auto& [tuple, vs] : ext.entries) {
                std::string rest = tuple;
                for (std::size_t s = 0; s < k; ++s) rest = rest.substr(rest.find('.') + 1);
                std::string loc = rest.substr(0, rest.find('.'));
                for (const auto& v : vs) CHECK(tl.at(loc).count(v) == 1);
            }
            ++compared;
        }
    }
    CHECK(compared > 50);
}

}
