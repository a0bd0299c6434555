#include "doctest.h"
#include "oracles.hpp"

#include "mabs/error.hpp"
#include "mabs/model_io.hpp"

#include <filesystem>

using namespace mabs;

namespace {

std::string data(const std::string& name) { return read_file(std::string(TEST_DATA_DIR) + "/" + name); }

std::string wrap(const std::string& globals, const std::string& tdecl, const std::string& transition) {
    return "<nta><declaration>" + globals + "</declaration><template><name>T</name><declaration>" + tdecl +
           "</declaration><location id=\"a\"><name>a</name></location><location id=\"b\"><name>b</name></location>"
           "<init ref=\"a\"/><transition><source ref=\"a\"/><target ref=\"b\"/>" +
           transition + "</transition></template><system>system T;</system></nta>";
}

std::vector<std::string> corpus_files() {
    std::vector<std::string> out;
    for (const auto& dir : {std::string(TEST_DATA_DIR), std::string(TEST_DATA_DIR) + "/../../benchmarks"})
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.path().extension() == ".xml") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_SUITE("model_io") {

TEST_CASE("one template with two locations") {
    MasTemplate m = parse_model(wrap("", "", ""));
    REQUIRE(m.templates.size() == 1);
    CHECK(m.templates[0].graph.locations.size() == 2);
    CHECK(m.templates[0].count == 1);
    CHECK(m.templates[0].graph.edges.size() == 1);
}

TEST_CASE("standalone voter template") {
    MasTemplate m = parse_model(data("voter.xml"));
    const AgentGraph& g = m.templates.at(0).graph;
    std::vector<std::string> locs;
    for (const auto& l : g.locations) locs.push_back(l.name);
    CHECK(locs == std::vector<std::string>{"idle", "waits", "has", "voted"});
    REQUIRE(g.edges.size() == 3);
    CHECK(g.edges[0].selects == std::vector<Select>{{"dec", 1, 2}});
    CHECK(g.edges[2].selects == std::vector<Select>{{"vt", 1, 3}, {"sg", 0, 1}});
    CHECK(g.locations[0].position == std::pair{0, 0});
    CHECK(g.find_private("mem_vt")->hi == 3);
}

TEST_CASE("unsupported and unresolved input fails loudly") {
    CHECK_THROWS_AS(parse_model(wrap("clock c;", "", "")), UnsupportedFeature);
    CHECK_THROWS_AS(parse_model(wrap("", "", "<label kind=\"guard\">c &gt; 2</label>")), Error);
    CHECK_THROWS_AS(parse_model(wrap("", "", "<label kind=\"synchronisation\">nochan!</label>")), Error);
    CHECK_THROWS_AS(parse_model(wrap("", "", "<label kind=\"assignment\">y = 1</label>")), Error);
    CHECK_THROWS_AS(parse_model(wrap("int[0,3] a[2];", "", "")), UnsupportedFeature);
    CHECK_THROWS_AS(parse_model("<nta><template>"), ParseError);
}

TEST_CASE("errors name the template") {
    try {
        parse_model(wrap("", "", "<label kind=\"assignment\">y = 1</label>"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("T") != std::string::npos);
    }
}

TEST_CASE("empty template list serializes to a minimal document") {
    MasTemplate empty;
    std::string text = serialize_model(empty);
    CHECK(parse_model(text) == empty);
    CHECK(serialize_model(parse_model(text)) == text);
}

TEST_CASE("round trip on the corpus is structural and byte-stable") {
    auto files = corpus_files();
    CHECK(files.size() >= 19);
    for (const auto& f : files) {
        CAPTURE(f);
        MasTemplate m = parse_model(read_file(f));
        std::string once = serialize_model(m);
        CHECK(parse_model(once) == m);
        CHECK(serialize_model(parse_model(once)) == once);
    }
}

TEST_CASE("round trip on random models") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        MasTemplate m = testing::random_model(seed);
        std::string once = serialize_model(m);
        CHECK(parse_model(once) == m);
        CHECK(serialize_model(parse_model(once)) == once);
    }
}

}
