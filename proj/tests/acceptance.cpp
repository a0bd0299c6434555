// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance <masabs> <work-dir> <source-dir>
#include "oracles.hpp"

#include "mabs/abstractor.hpp"
#include "mabs/benchmarks.hpp"
#include "mabs/checker.hpp"
#include "mabs/model_io.hpp"
#include "mabs/parser.hpp"

#include <sys/wait.h>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace mabs;
using namespace mabs::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << what << " (" << detail << ")" << std::endl;
}

void show(const std::vector<std::string>& xs, const std::string& seed) {
    for (std::size_t i = 0; i < xs.size() && i < 3; ++i) std::cerr << "  seed " << seed << ": " << xs[i] << "\n";
}

std::string exe;
fs::path work;

/// Runs the CLI with output captured to a file; returns the exit status.
int run(const std::string& args, std::string* out = nullptr) {
    fs::path log = work / "cli.out";
    std::string cmd = "'" + exe + "' " + args + " > '" + log.string() + "' 2>&1";
    int status = std::system(cmd.c_str());
    if (out) *out = read_file(log.string());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

constexpr std::uint64_t kSeeds = 200;

void random_corpus() {
    auto t0 = Clock::now();
    std::vector<Round> rounds;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) rounds.push_back(run_round(seed, 5));
    double secs = seconds_since(t0);

    std::size_t sandwich = 0, checks = 0, may = 0, must = 0, may_tr = 0, must_tr = 0, actl = 0, props = 0, skipped = 0;
    std::size_t may_holds = 0, must_fails = 0;
    for (const auto& r : rounds) {
        std::string seed = std::to_string(r.seed);
        if (r.skipped) {
            ++skipped;
            std::cerr << "  seed " << seed << " skipped: " << r.note << "\n";
        }
        sandwich += r.sandwich.size();
        checks += r.sandwich_checks;
        may += r.may.size();
        must += r.must.size();
        may_tr += r.may_transitions;
        must_tr += r.must_transitions;
        actl += r.actl.size();
        props += r.invariants;
        may_holds += r.may_holds;
        must_fails += r.must_fails;
        show(r.sandwich, seed);
        show(r.may, seed);
        show(r.must, seed);
        show(r.actl, seed);
    }
    std::ostringstream d1, d2, d3;
    d1 << kSeeds << " models, " << checks << " target/variable sets, " << sandwich << " violations, " << secs << " s";
    report(1, sandwich == 0 && checks >= kSeeds && secs < 300, "soundness sandwich lower <= exact <= upper", d1.str());
    d2 << kSeeds - skipped << " mappings, " << may_tr << " concrete transitions matched, " << must_tr
       << " must transitions witnessed, " << may + must << " violations";
    report(2, may == 0 && must == 0 && skipped == 0, "may-simulation and must-containment under alpha", d2.str());
    d3 << props << " invariants, " << may_holds << " hold on the may-abstraction, " << must_fails
       << " fail on the must-abstraction, " << actl << " violations";
    report(3, actl == 0 && props == 5 * (kSeeds - skipped) && skipped == 0, "A[] p preservation", d3.str());
}

void postal() {
    BenchOptions o;
    o.from = 1;
    o.to = 3;
    o.nc = 3;
    auto rows = run_postal(o);
    std::cout << format_table(rows);
    bool ok = true;
    std::ostringstream d;
    for (int nv = 1; nv <= 3; ++nv) {
        std::map<std::string, const BenchRow*> at;
        for (const auto& r : rows)
            if (r.param == nv) at[r.config] = &r;
        for (const auto& [name, r] : at) ok = ok && r->verdict == Verdict::Holds;
        auto c = at.at("concrete")->states, a1 = at.at("A1")->states, a2 = at.at("A2")->states, a3 = at.at("A3")->states;
        if (nv >= 2) ok = ok && a1 < c && a2 < c && a3 < c;
        ok = ok && a3 <= std::min(a1, a2);
        d << "NV=" << nv << ": " << c << "/" << a1 << "/" << a2 << "/" << a3 << (nv < 3 ? "; " : "");
    }
    report(4, ok, "postal voting: ballot stuffing holds on concrete, A1, A2, A3; A3 <= min(A1, A2) < concrete", d.str());
}

void social() {
    BenchOptions o;
    o.from = 2;
    o.to = 4;
    auto rows = run_social(o);
    std::cout << format_table(rows);
    bool ok = true;
    double prev = -1;
    std::ostringstream d;
    for (int n = 2; n <= 4; ++n) {
        const BenchRow *c = nullptr, *a = nullptr;
        for (const auto& r : rows)
            if (r.param == n) (r.config == "concrete" ? c : a) = &r;
        double red = reduction(c->states, a->states);
        ok = ok && a->verdict != Verdict::Inconclusive && red > prev && (n != 2 || red >= 50);
        prev = red;
        d << "NAg=" << n << ": " << to_string(a->verdict) << ", " << red << "%" << (n < 4 ? "; " : "");
    }
    report(5, ok, "social AI: compromise query conclusive on the mqual abstraction, reduction increasing", d.str());
}

void performance() {
    System sys = build_system(build_social_ai(5));
    std::vector<ExploreStats> stats;
    for (unsigned t : {1u, 4u, 8u}) {
        ExploreOptions o;
        o.threads = t;
        stats.push_back(explore(sys, o));
    }
    bool same = true;
    for (const auto& s : stats) same = same && s.states == stats[0].states && s.transitions == stats[0].transitions;
    std::ostringstream d;
    d << "social NAg=5: " << stats[0].states << " states, single thread " << stats[0].time_ms / 1000 << " s; 4 threads "
      << stats[1].time_ms / 1000 << " s; 8 threads " << stats[2].time_ms / 1000 << " s";
    report(6, same && stats[0].complete && stats[0].states >= 1'000'000 && stats[0].time_ms < 60'000,
           "at least 10^6 states in under 60 s, identical counts at 1/4/8 threads", d.str());
}

bool round_trip(const std::string& text, std::string& why) {
    MasTemplate m = parse_model(text);
    std::string a = serialize_model(m);
    std::string b = serialize_model(parse_model(a));
    if (a != b) why = "serialization not byte-stable";
    else if (!(parse_model(a) == m)) why = "reparse differs";
    return a == b && parse_model(a) == m;
}

void round_trips_and_cli(const fs::path& source) {
    std::vector<std::string> problems;
    std::size_t documents = 0;

    // Corpus: shipped models, random models and every abstraction output.
    std::vector<fs::path> files;
    for (const auto& dir : {source / "benchmarks", source / "tests" / "data"})
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".xml") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::string why;
        ++documents;
        if (!round_trip(read_file(f.string()), why)) problems.push_back(f.filename().string() + ": " + why);
    }
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        MasTemplate m = random_model(seed);
        std::mt19937_64 g(seed);
        MappingFunction f;
        std::vector<std::string> texts{serialize_model(m), serialize_model(to_model(combine(m)))};
        if (random_mapping(m, g, f)) {
            for (DomainTag tag : {DomainTag::Upper, DomainTag::Lower})
                texts.push_back(serialize_model(abstract(m, f, approximate(m, f.target, f.remove, tag)).model));
        }
        for (const auto& t : texts) {
            std::string why;
            ++documents;
            if (!round_trip(t, why)) problems.push_back("seed " + std::to_string(seed) + ": " + why);
        }
    }

    // Pipeline through the CLI: unfold -> approx(upper) -> abstract -> check.
    std::size_t pipelines = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        MasTemplate m = random_model(seed);
        auto vars = removable(m, "ext");
        if (vars.empty()) continue;
        std::string in = (work / "m.xml").string(), comb = (work / "comb.xml").string();
        std::string dom = (work / "d.json").string(), abs = (work / "abs.xml").string();
        write_file(in, serialize_model(m));
        std::string list = vars[0];
        int rc = run("unfold -i '" + in + "' -o '" + comb + "'");
        rc = rc ? rc : run("approx -i '" + comb + "' --target ext --vars '" + list + "' --type upper -o '" + dom + "'");
        rc = rc ? rc : run("abstract -i '" + comb + "' --target ext --vars '" + list + "' --type upper --domain '" + dom +
                           "' -o '" + abs + "'");
        if (rc != 0) {
            problems.push_back("seed " + std::to_string(seed) + ": pipeline exit " + std::to_string(rc));
            continue;
        }
        ++pipelines;
        std::string why;
        if (!round_trip(read_file(comb), why) || !round_trip(read_file(abs), why))
            problems.push_back("seed " + std::to_string(seed) + ": pipeline output " + why);
        std::mt19937_64 g(seed);
        MappingFunction f;
        f.target = "ext";
        f.remove = {list};
        for (const auto& p : random_invariants(m, f, g, 3)) {
            std::string out_abs, out_con;
            run("check -i '" + abs + "' -q 'A[] " + p + "'", &out_abs);
            run("check -i '" + in + "' -q 'A[] " + p + "'", &out_con);
            if (out_abs.find(": holds") != std::string::npos && out_con.find(": holds") == std::string::npos)
                problems.push_back("seed " + std::to_string(seed) + ": pipeline holds but concrete does not: " + p);
        }
    }

    // Exit-code contract: 0 success, 1 I/O or parse error, 2 usage error, 3 inconclusive.
    std::string voter = (source / "tests" / "data" / "voter.xml").string();
    std::string postal = (source / "benchmarks" / "postal_nv3_nc3.xml").string();
    std::string bad = (work / "bad.xml").string();
    write_file(bad, "<nta><template>");
    std::string cfg = (work / "a1.cfg").string();
    fs::remove(cfg);
    struct Case {
        std::string args;
        int code;
        std::string expect;
    };
    std::vector<Case> matrix{
        {"info -i '" + voter + "'", 0, "mem_vt"},
        {"info -i '" + (work / "missing.xml").string() + "'", 1, ""},
        {"info -i '" + bad + "'", 1, ""},
        {"", 2, ""},
        {"frobnicate", 2, ""},
        {"info --bogus -i '" + voter + "'", 2, ""},
        {"configure -c '" + cfg + "' --target Voter --vars mem_vt,mem_sg --type upper", 0, "mem_vt"},
        {"configure -c '" + cfg + "'", 0, "type = upper"},
        {"configure -c '" + cfg + "' --type sideways", 2, "type"},
        {"unfold -i '" + (work / "missing.xml").string() + "' -o '" + (work / "u.xml").string() + "'", 1, ""},
        {"unfold -i '" + voter + "' -o '" + (work / "u.xml").string() + "'", 0, ""},
        {"approx -i '" + voter + "' --target Voter --vars mem_dec --type upper -o '" + (work / "v.json").string() + "'", 0,
         "v.json"},
        {"approx -i '" + voter + "' --target Voter --vars nope --type upper -o -", 1, "nope"},
        {"abstract -i '" + voter + "' --target Voter --vars mem_dec --type upper -o -", 2, "domain"},
        {"abstract -i '" + voter + "' --target Voter --vars mem_dec --domain '" + (work / "v.json").string() + "' -o -", 0,
         "<nta>"},
        {"check -i '" + postal + "' -q 'A[](b_recv<=ep_sent && ep_sent<=NV)'", 0, "holds"},
        {"check -i '" + postal + "' -q 'A[] ep_sent < 2'", 0, "fails"},
        {"check -i '" + postal + "' --cap 10 -q 'A[] ep_sent < 5'", 3, "inconclusive"},
        {"check -i '" + voter + "' -q 'A[] (('", 1, ""},
        {"check -i '" + postal + "' --cap 0", 2, ""},
        {"bench nosuch", 2, ""},
        {"bench postal --from 1 --to 1", 0, "A3"},
    };
    std::size_t matrix_ok = 0;
    for (const auto& c : matrix) {
        std::string out;
        int rc = run(c.args, &out);
        bool ok = rc == c.code && out.find(c.expect) != std::string::npos;
        matrix_ok += ok;
        if (!ok) problems.push_back("'masabs " + c.args + "' exited " + std::to_string(rc) + ", expected " +
                                    std::to_string(c.code));
    }
    for (const auto& p : problems) std::cerr << "  " << p << "\n";
    std::ostringstream d;
    d << documents << " documents, " << pipelines << " CLI pipelines, " << matrix_ok << "/" << matrix.size()
      << " exit-code cases, " << problems.size() << " problems";
    report(7, problems.empty() && pipelines >= 20, "round trip, pipeline reparse and CLI exit codes", d.str());
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: acceptance <masabs> <work-dir> <source-dir>\n";
        return 2;
    }
    exe = fs::absolute(argv[1]).string();
    work = fs::absolute(argv[2]);
    fs::create_directories(work);
    fs::path source = argv[3];

    auto guard = [](int n, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(n, false, "threw", e.what());
        }
    };
    guard(1, random_corpus);
    guard(4, postal);
    guard(5, social);
    guard(6, performance);
    guard(7, [&] { round_trips_and_cli(source); });
    std::cout << (failures ? "FAILED: " + std::to_string(failures) + " criteria" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
