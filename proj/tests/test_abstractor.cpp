#include "doctest.h"
#include "oracles.hpp"

#include "mabs/abstractor.hpp"
#include "mabs/benchmarks.hpp"
#include "mabs/checker.hpp"
#include "mabs/error.hpp"
#include "mabs/model_io.hpp"
#include "mabs/parser.hpp"

using namespace mabs;

namespace {

MasTemplate voter() { return parse_model(read_file(std::string(TEST_DATA_DIR) + "/voter.xml")); }

MappingFunction mapping(std::string target, std::vector<std::string> remove, std::vector<std::string> scope = {}) {
    MappingFunction f;
    f.target = std::move(target);
    f.remove = std::move(remove);
    f.scope = std::move(scope);
    return f;
}

AbstractionResult may(const MasTemplate& m, const MappingFunction& f) {
    return abstract(m, f, approx_upper(m, f.target, f.remove));
}

std::vector<const Edge*> edges_between(const MasTemplate& m, const std::string& t, const std::string& a,
                                       const std::string& b) {
    std::vector<const Edge*> out;
    for (const auto& e : m.find_template(t)->graph.edges)
        if (e.source == a && e.target == b) out.push_back(&e);
    return out;
}

bool names_anywhere(const AgentGraph& g, const std::string& name) {
    for (const auto& e : g.edges) {
        if (free_names(e.guard).count(name)) return true;
        for (const auto& u : e.updates)
            if (u.target == name || free_names(u.value).count(name)) return true;
    }
    return false;
}

} // namespace

TEST_SUITE("abstractor") {

TEST_CASE("A1 removes the vote memory from the postal model") {
    MasTemplate m = build_postal(2, 3);
    AbstractionResult r = may(m, mapping("Voter", {"mem_vt", "mem_sg"}));
    const AgentGraph& v = r.model.find_template("Voter")->graph;
    CHECK_FALSE(v.find_private("mem_vt"));
    CHECK_FALSE(v.find_private("mem_sg"));
    CHECK(v.find_private("mem_dec"));
    CHECK_FALSE(names_anywhere(v, "mem_vt"));
    CHECK_FALSE(names_anywhere(v, "mem_sg"));
    CHECK(parse_model(serialize_model(r.model)) == r.model);
    System sys = build_system(r.model);
    CHECK(check(sys, parse_query(std::string(kBallotStuffing))).verdict == Verdict::Holds);
    CHECK(explore(sys).states < explore(build_system(m)).states);
}

TEST_CASE("merge into a validity flag") {
    MasTemplate m = voter();
    MappingFunction f = mapping("Voter", {"mem_vt", "mem_sg"});
    f.merge = MergeSpec{"valid", 0, "mem_sg*mem_vt>0"};
    AbstractionResult r = may(m, f);
    const AgentGraph& v = r.model.find_template("Voter")->graph;
    const VarDecl* valid = v.find_private("valid");
    REQUIRE(valid);
    CHECK(valid->lo == 0);
    CHECK(valid->hi == 1);
    CHECK(valid->initial == 0);
    for (const auto& e : v.edges) {
        bool writes = std::any_of(e.updates.begin(), e.updates.end(), [](const Update& u) { return u.target == "valid"; });
        CHECK(writes == (e.source == "has"));
    }
    // valid = 1 is reachable at voted exactly when some sg*vt > 0.
    System sys = build_system(r.model);
    CHECK(check(sys, parse_query("E<> Voter(1).voted && Voter(1).valid == 1")).verdict == Verdict::Holds);
    CHECK(check(sys, parse_query("E<> Voter(1).voted && Voter(1).valid == 0")).verdict == Verdict::Holds);
    CHECK(check(sys, parse_query("E<> !Voter(1).voted && Voter(1).valid == 1")).verdict == Verdict::Fails);
}

TEST_CASE("removing an unused variable only drops its declaration") {
    MasTemplate m = voter();
    m.templates[0].graph.privates.push_back({"unused", 0, 3, 1, VarKind::Private});
    AbstractionResult r = may(m, mapping("Voter", {"unused"}));
    CHECK(r.model == voter());
}

TEST_CASE("scope boundary of A2") {
    MasTemplate m = build_postal(2, 3);
    auto edges = check_scope_boundary(m, mapping("Voter", {"mem_dec"}, {"has", "voted"}));
    REQUIRE_FALSE(edges.empty());
    bool entering = false;
    for (const auto& b : edges) {
        if (b.source == "waits" && b.target == "has") entering = b.entering;
        CHECK(b.entering);
    }
    CHECK(entering);
    CHECK(check_scope_boundary(m, mapping("Voter", {"mem_dec"})).empty());
}

TEST_CASE("exiting edge under an upper domain has one variant per target vector") {
    MasTemplate m = voter();
    MappingFunction f = mapping("Voter", {"mem_dec"}, {"waits"});
    auto boundary = check_scope_boundary(m, f);
    REQUIRE(boundary.size() == 2);
    CHECK(boundary[0].entering);
    CHECK_FALSE(boundary[1].entering);
    AbstractionResult r = may(m, f);
    auto exits = edges_between(r.model, "Voter", "waits", "has");
    REQUIRE(exits.size() == 2);
    std::set<int> values;
    for (const auto* e : exits) {
        REQUIRE(e->updates.size() == 1);
        CHECK(e->updates[0].target == "mem_dec");
        values.insert(*literal_value(e->updates[0].value));
    }
    CHECK(values == std::set<int>{1, 2});
    CHECK(r.model.find_template("Voter")->graph.find_private("mem_dec"));
}

TEST_CASE("exiting edges are dropped and reported under a lower domain") {
    MasTemplate m = voter();
    MappingFunction f = mapping("Voter", {"mem_dec"}, {"waits"});
    AbstractionResult r = abstract(m, f, approx_lower(m, "Voter", {"mem_dec"}));
    REQUIRE(r.needs_confirmation.size() == 1);
    CHECK(r.needs_confirmation[0].source == "waits");
    CHECK(edges_between(r.model, "Voter", "waits", "has").empty());
}

TEST_CASE("must edges keep only guards decided for every vector") {
    MasTemplate m = parse_model(R"(<nta><declaration>int[0,2] x = 0; int[0,1] y = 0;</declaration>
      <template><name>T</name><location id="a"><name>a</name></location><location id="b"><name>b</name></location>
      <location id="c"><name>c</name></location><init ref="a"/>
      <transition><source ref="a"/><target ref="b"/><label kind="select">s : int[1,2]</label>
        <label kind="assignment">x = s</label></transition>
      <transition><source ref="b"/><target ref="c"/><label kind="guard">x == 1</label>
        <label kind="assignment">y = 1</label></transition>
      </template><system>system T;</system></nta>)");
    MappingFunction f = mapping("T", {"x"});
    AbstractionResult up = may(m, f);
    AbstractionResult lo = abstract(m, f, approx_lower(m, "T", {"x"}));
    System su = build_system(up.model), sl = build_system(lo.model);
    CHECK(check(su, parse_query("E<> y == 1")).verdict == Verdict::Holds);
    CHECK(check(sl, parse_query("E<> y == 1")).verdict == Verdict::Fails);
    CHECK(check(sl, parse_query("E<> T(1).b")).verdict == Verdict::Holds);
}

TEST_CASE("invalid mappings") {
    MasTemplate m = voter();
    LocalDomain d = approx_upper(m, "Voter", {"mem_vt"});
    MappingFunction f = mapping("Voter", {"mem_vt"});
    f.merge = MergeSpec{"bad", 0, "mem_vt + mem_dec"};
    CHECK_THROWS_AS(abstract(m, f, d), SpecError);
    f.merge = MergeSpec{"mem_dec", 0, "mem_vt"};
    CHECK_THROWS_AS(abstract(m, f, d), SpecError);
    CHECK_THROWS_AS(abstract(m, mapping("Voter", {"mem_sg"}), d), SpecError);
    CHECK_THROWS_AS(abstract(m, mapping("Voter", {"mem_vt"}, {"nowhere"}), d), SpecError);
    LocalDomain partial = d;
    partial.entries.erase("has");
    CHECK_THROWS_AS(abstract(m, mapping("Voter", {"mem_vt"}), partial), Error);
    LocalDomain exact = project_reachable(build_system(m), "Voter", {"mem_vt"});
    CHECK_THROWS_AS(abstract(m, mapping("Voter", {"mem_vt"}), exact), SpecError);
}

TEST_CASE("ext target emits a combined model") {
    MasTemplate m = build_postal(1, 2);
    MappingFunction f = mapping("ext", {"Voter(1).mem_vt", "Voter(1).mem_sg"});
    AbstractionResult r = may(m, f);
    REQUIRE(r.model.templates.size() == 1);
    CHECK(r.model.templates[0].graph.components == std::vector<std::string>{"Voter(1)", "Authority(1)"});
    CHECK_FALSE(r.model.find_global("Voter(1).mem_vt"));
    CHECK(check(build_system(r.model), parse_query(std::string(kBallotStuffing))).verdict == Verdict::Holds);
    CHECK(testing::check_may_simulation(m, f, r.model).violations.empty());
}

TEST_CASE("outputs reparse and validate on random models") {
    for (std::uint64_t seed = 2000; seed < 2100; ++seed) {
        CAPTURE(seed);
        MasTemplate m = testing::random_model(seed);
        std::mt19937_64 g(seed);
        MappingFunction f;
        if (!testing::random_mapping(m, g, f)) continue;
        for (DomainTag tag : {DomainTag::Upper, DomainTag::Lower}) {
            AbstractionResult r = abstract(m, f, approximate(m, f.target, f.remove, tag));
            std::string text = serialize_model(r.model);
            MasTemplate back = parse_model(text);
            CHECK(back == r.model);
            CHECK_NOTHROW(validate(back));
        }
    }
}

}
