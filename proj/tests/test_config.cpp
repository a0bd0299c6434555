#include "doctest.h"

#include "mabs/config.hpp"
#include "mabs/error.hpp"

using namespace mabs;

TEST_SUITE("config") {

TEST_CASE("A1 configuration") {
    Config c = read_config("input = postal.xml\ntarget = Voter\nvariables = mem_vt, mem_sg\ntype = upper\n");
    CHECK(c.input == "postal.xml");
    CHECK(c.target == "Voter");
    CHECK(c.variables == std::vector<std::string>{"mem_vt", "mem_sg"});
    CHECK(c.type == DomainTag::Upper);
    CHECK_FALSE(c.merge);
    CHECK(c.scope.empty());
}

TEST_CASE("merge spec and comments") {
    Config c = read_config("# A1 with a merge\nmerge.name = valid\nmerge.initial = 0\n"
                           "merge.expr = mem_sg*mem_vt>0\n\nscope = has, voted\n");
    REQUIRE(c.merge);
    CHECK(*c.merge == MergeSpec{"valid", 0, "mem_sg*mem_vt>0"});
    CHECK(c.scope == std::vector<std::string>{"has", "voted"});
}

TEST_CASE("malformed values") {
    CHECK_THROWS_AS(read_config("type = middle\n"), FormatError);
    CHECK_THROWS_AS(read_config("cap = lots\n"), FormatError);
    CHECK_THROWS_AS(read_config("threads = 0\n"), FormatError);
    CHECK_THROWS_AS(read_config("merge.name = valid\n"), FormatError);
    CHECK_THROWS_AS(read_config("no equals sign\n"), FormatError);
}

TEST_CASE("unknown keys warn") {
    std::vector<std::string> warnings;
    Config c = read_config("colour = blue\ntarget = ext\n", &warnings);
    CHECK(c.target == "ext");
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("colour") != std::string::npos);
}

TEST_CASE("write round-trips") {
    Config c;
    c.input = "in.xml";
    c.output = "out.xml";
    c.target = "Authority";
    c.variables = {"dec_recv"};
    c.type = DomainTag::Lower;
    c.scope = {"coll_vts"};
    c.merge = MergeSpec{"m", 1, "dec_recv + 1"};
    c.domain = "d.json";
    c.always_available = {"cast"};
    c.cap = 1000;
    c.threads = 4;
    c.query = "A[] b_recv <= ep_sent";
    std::string text = write_config(c);
    CHECK(read_config(text) == c);
    CHECK(write_config(read_config(text)) == text);
    CHECK(read_config(write_config(Config{})) == Config{});
}

TEST_CASE("set_config_value") {
    Config c;
    CHECK(set_config_value(c, "type", "lower"));
    CHECK(c.type == DomainTag::Lower);
    CHECK_FALSE(set_config_value(c, "colour", "blue"));
    CHECK_THROWS_AS(set_config_value(c, "type", "sideways"), FormatError);
}

}
