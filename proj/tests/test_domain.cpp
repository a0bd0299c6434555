#include "doctest.h"

#include "mabs/domain.hpp"
#include "mabs/error.hpp"

using namespace mabs;

TEST_SUITE("domain") {

TEST_CASE("reads a single entry") {
    LocalDomain d = read_domain(R"({"variables": ["dec"], "tag": "upper", "target": "Voter",
                                    "entries": {"waits": [[2], [1]]}})");
    CHECK(d.variables == std::vector<std::string>{"dec"});
    CHECK(d.tag == DomainTag::Upper);
    CHECK(d.target == "Voter");
    CHECK(d.at("waits") == std::set<ValueVector>{{1}, {2}});
    CHECK(d.total() == 2);
    CHECK(d.at("idle").empty());
}

TEST_CASE("empty entries are valid") {
    LocalDomain d = read_domain(R"({"variables": ["x"], "tag": "lower", "target": "ext", "entries": {}})");
    CHECK(d.entries.empty());
    CHECK(d.tag == DomainTag::Lower);
}

TEST_CASE("format errors") {
    CHECK_THROWS_AS(read_domain(R"({"variables": ["dec"], "tag": "upper", "target": "V", "entries": {"w": [[1, 2]]}})"),
                    FormatError);
    CHECK_THROWS_AS(read_domain(R"({"variables": ["x"], "tag": "middle", "target": "V", "entries": {}})"), FormatError);
    CHECK_THROWS_AS(read_domain("[1, 2"), FormatError);
    CHECK_THROWS_AS(parse_domain_tag("sideways"), FormatError);
}

TEST_CASE("write is sorted, deterministic and round-trips") {
    LocalDomain d;
    d.variables = {"a", "b"};
    d.tag = DomainTag::Exact;
    d.target = "T";
    d.entries["l1"] = {{2, 0}, {0, 1}, {0, 0}};
    d.entries["l0"] = {};
    std::string text = write_domain(d);
    CHECK(read_domain(text) == d);
    CHECK(write_domain(read_domain(text)) == text);
    CHECK(text.find("l0") < text.find("l1"));
}

TEST_CASE("subset") {
    LocalDomain a, b;
    a.entries["x"] = {{1}};
    b.entries["x"] = {{1}, {2}};
    CHECK(subset(a, b));
    CHECK_FALSE(subset(b, a));
    a.entries["y"] = {{0}};
    CHECK_FALSE(subset(a, b));
}

}
