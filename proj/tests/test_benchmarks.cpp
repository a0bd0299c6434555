#include "doctest.h"

#include "mabs/benchmarks.hpp"
#include "mabs/checker.hpp"
#include "mabs/error.hpp"
#include "mabs/model_io.hpp"
#include "mabs/parser.hpp"

using namespace mabs;

namespace {

std::uint64_t states(const MasTemplate& m) { return explore(build_system(m)).states; }

} // namespace

TEST_SUITE("benchmarks") {

TEST_CASE("parameter checks") {
    CHECK_THROWS_AS(build_postal(0, 3), SpecError);
    CHECK_THROWS_AS(build_postal(1, 0), SpecError);
    CHECK_THROWS_AS(build_social_ai(1), SpecError);
    CHECK_THROWS_AS(benchmark_abstraction("A9"), SpecError);
}

TEST_CASE("postal voting grows with NV and ballot stuffing never happens") {
    Query q = parse_query(std::string(kBallotStuffing));
    std::uint64_t prev = 0;
    for (int nv = 1; nv <= 3; ++nv) {
        CAPTURE(nv);
        MasTemplate m = build_postal(nv, 3);
        std::uint64_t concrete = states(m);
        CHECK(concrete > prev);
        prev = concrete;
        CHECK(check(build_system(m), q).verdict == Verdict::Holds);
        std::map<std::string, std::uint64_t> count;
        for (const char* a : {"A1", "A2", "A3"}) {
            MasTemplate abs = apply_steps(m, benchmark_abstraction(a));
            CHECK(parse_model(serialize_model(abs)) == abs);
            CHECK(check(build_system(abs), q).verdict == Verdict::Holds);
            count[a] = states(abs);
            if (nv >= 2) CHECK(count[a] < concrete);
        }
        CHECK(count["A3"] <= std::min(count["A1"], count["A2"]));
    }
}

TEST_CASE("social AI: compromise query is conclusive on both models") {
    Query q = parse_query(std::string(kCompromised));
    for (int nag = 2; nag <= 3; ++nag) {
        CAPTURE(nag);
        MasTemplate m = build_social_ai(nag);
        MasTemplate abs = apply_steps(m, benchmark_abstraction("mqual"));
        CHECK(check(build_system(m), q).verdict != Verdict::Inconclusive);
        CHECK(check(build_system(abs), q).verdict != Verdict::Inconclusive);
        CHECK(states(abs) < states(m));
        for (const auto& entry : abs.templates) {
            if (entry.graph.name != "AI") continue;
            CHECK(entry.graph.find_private("mqual"));
            CHECK_FALSE(entry.graph.find_private("data"));
            CHECK_FALSE(entry.graph.find_private("peer_q"));
        }
    }
}

TEST_CASE("reduction percentage") {
    CHECK(reduction(100, 25) == doctest::Approx(75.0));
    CHECK(reduction(165, 38) == doctest::Approx(76.97).epsilon(0.001));
}

TEST_CASE("harness rows and formatting") {
    BenchOptions o;
    o.from = 1;
    o.to = 2;
    auto rows = run_postal(o);
    CHECK(rows.size() == 8);
    for (const auto& r : rows) CHECK(r.verdict == Verdict::Holds);
    CHECK(rows[0].published_states == doctest::Approx(31));
    std::string table = format_table(rows);
    CHECK(table.find("#St") != std::string::npos);
    CHECK(table.find("A3") != std::string::npos);
    std::string json = format_json_lines(rows);
    CHECK(std::count(json.begin(), json.end(), '\n') == 8);

    BenchOptions s;
    s.from = 2;
    s.to = 3;
    s.grid_threads = 2;
    auto social = run_social(s);
    CHECK(social.size() == 4);
    CHECK(format_table(social).find("Reduct") != std::string::npos);
}

}
