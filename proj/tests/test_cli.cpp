#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gfp/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using gfp::read_text_file;

namespace {

std::filesystem::path work_dir() {
    static std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() / "gfp_cli_tests";
        std::filesystem::remove_all(d);
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

std::string wpath(const std::string& name) { return (work_dir() / name).string(); }

// runs the tool, captures combined output, returns the exit code
int run_cli(const std::string& args, std::string* output = nullptr) {
    std::string log = wpath("last_output.txt");
    std::string cmd = std::string(GFPERC_BIN) + " " + args + " > " + log + " 2>&1";
    int status = std::system(cmd.c_str());
    if (output) *output = read_text_file(log);
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

struct Pgm {
    int nx = 0, ny = 0;
    std::string payload;
};

Pgm parse_pgm(const std::string& path) {
    std::string raw = read_text_file(path);
    Pgm p;
    int maxval = 0, consumed = 0;
    REQUIRE(std::sscanf(raw.c_str(), "P5\n%d %d\n%d\n%n", &p.nx, &p.ny, &maxval, &consumed) == 3);
    CHECK(maxval == 255);
    p.payload = raw.substr(static_cast<std::size_t>(consumed));
    REQUIRE(p.payload.size() == static_cast<std::size_t>(p.nx) * p.ny);
    return p;
}

void write_config(const std::string& path, const std::string& body) {
    gfp::write_text_file(path, body);
}

} // namespace

TEST_CASE("sample writes a reproducible field dump") {
    std::string out1 = wpath("f1.gf2"), out2 = wpath("f2.gf2");
    std::string log;
    CHECK(run_cli("sample --kernel bf --eps 0.5 --extent 8 --seed 7 --out " + out1, &log) == 0);
    CHECK(log.find("wrote " + out1) != std::string::npos);
    CHECK(run_cli("sample --kernel bf --eps 0.5 --extent 8 --seed 7 --out " + out2) == 0);
    CHECK(read_text_file(out1) == read_text_file(out2));

    std::string out3 = wpath("f3.gf2");
    CHECK(run_cli("sample --kernel bf --eps 0.5 --extent 8 --seed 8 --out " + out3) == 0);
    CHECK(read_text_file(out1) != read_text_file(out3));
}

TEST_CASE("sample render: excursion mask and its largest component") {
    std::string out = wpath("render.gf2");
    CHECK(run_cli("sample --kernel rq --beta 4 --eps 0.5 --extent 8 --seed 3 --level 0 "
                  "--render --out " +
                  out) == 0);
    Pgm mask = parse_pgm(wpath("render_mask.pgm"));
    Pgm big = parse_pgm(wpath("render_largest.pgm"));
    CHECK(mask.nx == 16);
    CHECK(mask.ny == 16);
    REQUIRE(big.nx == mask.nx);
    REQUIRE(big.ny == mask.ny);
    // the highlighted component is a nonempty subset of the mask (0 = in set)
    long in_mask = 0, in_big = 0;
    for (std::size_t i = 0; i < mask.payload.size(); ++i) {
        if (mask.payload[i] == 0) ++in_mask;
        if (big.payload[i] == 0) {
            ++in_big;
            CHECK(mask.payload[i] == 0);
        }
    }
    CHECK(in_big > 0);
    CHECK(in_big <= in_mask);
    CHECK(in_mask < static_cast<long>(mask.payload.size()));   // level 0: both phases appear
}

TEST_CASE("sample render at an extreme level fills the mask") {
    std::string out = wpath("allset.gf2");
    CHECK(run_cli("sample --kernel bf --eps 1 --extent 6 --seed 2 --level 1e9 --render --out " +
                  out) == 0);
    Pgm mask = parse_pgm(wpath("allset_mask.pgm"));
    for (char c : mask.payload) CHECK(c == 0);
}

TEST_CASE("sample argument errors exit with code 2") {
    CHECK(run_cli("sample") == 2);                                       // --out required
    CHECK(run_cli("sample --out x.gf2 --kernel rq") == 2);               // beta missing
    CHECK(run_cli("sample --out x.gf2 --kernel rq --beta 1.5") == 2);    // beta too small
    CHECK(run_cli("sample --out x.gf2 --kernel nope") == 2);
    CHECK(run_cli("sample --out x.gf2 --eps 0") == 2);
    CHECK(run_cli("sample --out x.gf2 --kernel tabulated") == 2);
    CHECK(run_cli("sample --no-such-flag") == 2);
    std::string log;
    CHECK(run_cli("sample --out /nonexistent_dir_gfp/x.gf2 --extent 4 --eps 1", &log) == 3);
    CHECK(log.find("error:") != std::string::npos);
}

TEST_CASE("experiment: deterministic csv across thread counts, gate table printed") {
    std::string cfg = wpath("crossing.json");
    write_config(cfg, R"({
      "schema_version": 1,
      "experiment": "crossing_curve",
      "scales": [8],
      "levels": [-0.1, 0.0, 0.1],
      "n_trials": 40,
      "master_seed": 2
    })");
    std::string log1;
    int rc1 = run_cli("--threads 1 experiment --config " + cfg + " --out " + wpath("run1"), &log1);
    CHECK((rc1 == 0 || rc1 == 1));   // statistical gates may fail at 40 trials
    CHECK(log1.find("gate monotone_levels") != std::string::npos);
    CHECK(log1.find("wrote " + wpath("run1") + "/crossing_curve.csv") != std::string::npos);

    int rc2 = run_cli("--threads 2 experiment --config " + cfg + " --out " + wpath("run2"));
    CHECK(rc1 == rc2);
    CHECK(read_text_file(wpath("run1") + "/crossing_curve.csv") ==
          read_text_file(wpath("run2") + "/crossing_curve.csv"));

    // n_trials override changes the row counts
    CHECK(run_cli("experiment --config " + cfg + " --out " + wpath("run3") + " --trials 10") >= 0);
    CHECK(read_text_file(wpath("run3") + "/crossing_curve.csv") !=
          read_text_file(wpath("run1") + "/crossing_curve.csv"));
}

TEST_CASE("experiment passes cleanly on the certificate recursion") {
    std::string cfg = wpath("bootstrap.json");
    write_config(cfg, R"({"schema_version": 1, "experiment": "bootstrap_recursion"})");
    std::string log;
    CHECK(run_cli("experiment --config " + cfg + " --out " + wpath("boot"), &log) == 0);
    CHECK(log.find("exp_certificate") != std::string::npos);
    CHECK(log.find("FAIL") == std::string::npos);
    CHECK(std::filesystem::exists(wpath("boot") + "/manifest.json"));
}

TEST_CASE("experiment config errors leave no outputs behind") {
    std::string bad = wpath("bad.json");
    write_config(bad, "{ this is not json");
    std::string log;
    CHECK(run_cli("experiment --config " + bad + " --out " + wpath("bad_out"), &log) == 2);
    CHECK(log.find("config: invalid JSON") != std::string::npos);
    CHECK(!std::filesystem::exists(wpath("bad_out")));

    write_config(bad, R"({"schema_version": 1, "experiment": "unknown_thing"})");
    CHECK(run_cli("experiment --config " + bad + " --out " + wpath("bad_out")) == 2);
    CHECK(!std::filesystem::exists(wpath("bad_out")));

    CHECK(run_cli("experiment --config " + wpath("missing.json") + " --out " +
                  wpath("bad_out")) == 3);
    CHECK(!std::filesystem::exists(wpath("bad_out")));

    CHECK(run_cli("experiment --config " + bad) == 2);   // --out required
}

TEST_CASE("verify quick profile: reproducible report, criteria listed") {
    std::string v1 = wpath("verify1.json"), v2 = wpath("verify2.json");
    std::string log1, log2;
    int rc1 = run_cli("verify --profile quick --out " + v1, &log1);
    int rc2 = run_cli("verify --profile quick --out " + v2, &log2);
    CHECK(rc1 == 0);
    CHECK(rc2 == 0);
    CHECK(read_text_file(v1) == read_text_file(v2));

    CHECK(log1.find("combinatorial_exactness") != std::string::npos);
    CHECK(log1.find("skip") != std::string::npos);   // full-only criteria are skipped

    std::string json = read_text_file(v1);
    CHECK(json.find("\"all_pass\": true") != std::string::npos);
    CHECK(json.find("\"runtime_s\"") == std::string::npos);   // report carries no timings

    CHECK(run_cli("verify --profile bogus") == 2);
}

TEST_CASE("top-level usage errors") {
    CHECK(run_cli("") == 2);              // a subcommand is required
    CHECK(run_cli("frobnicate") == 2);
    std::string log;
    CHECK(run_cli("--help", &log) == 0);
    CHECK(log.find("sample") != std::string::npos);
    CHECK(log.find("experiment") != std::string::npos);
    CHECK(log.find("verify") != std::string::npos);
}
