#include "doctest.h"

#include "gfp/experiments.hpp"
#include "gfp/io.hpp"
#include "gfp/threads.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

using namespace gfp;

namespace {

std::string tmp_path(const std::string& name) {
    static bool made = false;
    std::filesystem::path dir = std::filesystem::temp_directory_path() / "gfp_exp_tests";
    if (!made) {
        std::filesystem::create_directories(dir);
        made = true;
    }
    return (dir / name).string();
}

// message of the invalid_argument an action throws; empty if none
std::string config_error(const std::function<void()>& action) {
    try {
        action();
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

bool error_mentions(const std::function<void()>& action, const std::string& needle) {
    std::string msg = config_error(action);
    return msg.find(needle) != std::string::npos;
}

std::string strip_runtime(const std::string& summary) {
    std::string out;
    std::size_t pos = 0;
    while (pos < summary.size()) {
        std::size_t end = summary.find('\n', pos);
        if (end == std::string::npos) end = summary.size();
        std::string line = summary.substr(pos, end - pos);
        if (line.find("runtime_s") == std::string::npos) out += line + "\n";
        pos = end + 1;
    }
    return out;
}

const GateResult* find_gate(const Report& rep, const std::string& name) {
    for (const auto& g : rep.gates)
        if (g.name == name) return &g;
    return nullptr;
}

} // namespace

TEST_CASE("experiment registry and defaults") {
    const auto& names = experiment_names();
    REQUIRE(names.size() == 9);
    CHECK(names.front() == "crossing_curve");
    CHECK(names.back() == "bootstrap_recursion");
    for (const auto& nm : names) {
        ExperimentConfig cfg = default_config(nm);
        CHECK(cfg.experiment == nm);
        CHECK(cfg.n_trials >= 1);
    }
    CHECK(error_mentions([] { default_config("nope"); }, "unknown experiment 'nope'"));
    CHECK(error_mentions([] { default_config("nope"); }, "crossing_curve"));
    ExperimentConfig bad;
    bad.experiment = "nope";
    CHECK(error_mentions([&] { run_experiment(bad); }, "unknown experiment"));
}

TEST_CASE("config parsing rejects malformed input with a precise message") {
    auto parse = [](const std::string& text) { return [text] { parse_config(text); }; };

    CHECK(error_mentions(parse("{ not json"), "config: invalid JSON"));
    CHECK(error_mentions(parse("[1, 2]"), "root must be an object"));
    CHECK(error_mentions(parse(R"({"schema_version":1,"experiment":"self_duality","bogus":3})"),
                         "unknown key 'bogus'"));
    CHECK(error_mentions(parse(R"({"experiment":"self_duality"})"),
                         "schema_version must be the integer 1"));
    CHECK(error_mentions(parse(R"({"schema_version":2,"experiment":"self_duality"})"),
                         "schema_version must be the integer 1"));
    CHECK(error_mentions(parse(R"({"schema_version":1})"), "experiment must be a string"));
    CHECK(error_mentions(parse(R"({"schema_version":1,"experiment":"wat"})"),
                         "unknown experiment 'wat'"));

    std::string head = R"({"schema_version":1,"experiment":"self_duality",)";
    CHECK(error_mentions(parse(head + R"("kernel":{"family":"bargmann_fock","smoothing":1}})"),
                         "unknown key 'kernel.smoothing'"));
    CHECK(error_mentions(parse(head + R"("kernel":{"family":"bargmann_fock","beta":4}})"),
                         "kernel.beta only applies to rational_quadratic"));
    CHECK(error_mentions(parse(head + R"("kernel":{"family":"rational_quadratic"}})"),
                         "kernel.beta is required"));
    CHECK(error_mentions(parse(head + R"("kernel":{"family":"tabulated"}})"),
                         "kernel.table_path is required"));
    CHECK(error_mentions(parse(head + R"("kernel":{"family":"sinc"}})"),
                         "kernel.family must be rational_quadratic, bargmann_fock or tabulated"));
    CHECK(error_mentions(parse(head + R"("eps":-0.5})"), "eps must be positive"));
    CHECK(error_mentions(parse(head + R"("scales":[1,"two"]})"),
                         "key 'scales' must be an array of numbers"));
    CHECK(error_mentions(parse(head + R"("n_trials":0})"), "n_trials out of range"));
    CHECK(error_mentions(parse(head + R"("n_trials":2.5})"), "n_trials must be an integer"));
    CHECK(error_mentions(parse(head + R"("master_seed":-1})"),
                         "master_seed must be a nonnegative integer"));
    CHECK(error_mentions(parse(head + R"("truncation_radii":[2,-1]})"),
                         "truncation_radii must be positive"));
    CHECK(error_mentions(parse(head + R"("rho1_px":0})"), "rho1_px must be positive"));
    CHECK(error_mentions(parse(head + R"("exponents":{"zeta":1}})"),
                         "unknown key 'exponents.zeta'"));
    CHECK(error_mentions(parse(head + R"("bootstrap":{"exp":{"c9":1}}})"),
                         "unknown key 'bootstrap.exp.c9'"));
    CHECK(error_mentions(parse(head + R"("bootstrap":{"horizon":8.5}})"),
                         "bootstrap.horizon must be an integer"));
}

TEST_CASE("config parsing applies defaults and round trips") {
    ExperimentConfig cfg =
        parse_config(R"({"schema_version":1,"experiment":"self_duality"})");
    CHECK(cfg.experiment == "self_duality");
    CHECK(cfg.n_trials == 4000);
    CHECK(cfg.scales == std::vector<double>{64});
    CHECK(cfg.levels == std::vector<double>{0.0});
    CHECK(cfg.kernel.family == KernelFamily::BargmannFock);
    CHECK(cfg.kernel.amplitude == 1.0);
    CHECK(cfg.eps == 0.5);

    ExperimentConfig over = parse_config(R"({
      "schema_version": 1,
      "experiment": "crossing_curve",
      "kernel": {"family": "rational_quadratic", "beta": 3.5, "amplitude": 2.0},
      "eps": 0.25,
      "scales": [8, 16],
      "levels": [-0.3, 0.3],
      "truncation_radii": [4],
      "n_trials": 12,
      "master_seed": 99,
      "exponents": {"theta": 0.2}
    })");
    CHECK(over.kernel.family == KernelFamily::RationalQuadratic);
    CHECK(over.kernel.beta == 3.5);
    CHECK(over.kernel.amplitude == 2.0);
    CHECK(over.eps == 0.25);
    CHECK(over.scales == std::vector<double>({8, 16}));
    CHECK(over.truncation_radii == std::vector<double>{4});
    CHECK(over.n_trials == 12);
    CHECK(over.master_seed == 99);
    CHECK(over.exponents.theta == 0.2);
    CHECK(over.exponents.h == 0.5);   // untouched default

    // resolved config -> json -> config -> json is a fixed point
    std::string j1 = config_to_json(over);
    ExperimentConfig back = parse_config(j1);
    CHECK(config_to_json(back) == j1);
    CHECK(back.master_seed == 99);
    CHECK(back.kernel.beta == 3.5);
}

TEST_CASE("config with a tabulated kernel loads the table file") {
    KernelTable t;
    t.n = 5;
    t.mesh = 0.5;
    t.values.assign(25, 0.0);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) {
            double x = (i - 2) * 0.5, y = (j - 2) * 0.5;
            t.values[static_cast<std::size_t>(j) * 5 + i] = std::exp(-(x * x + y * y));
        }
    std::string path = tmp_path("cfg_kernel.qtab");
    write_qtab(path, t);

    std::string json = std::string(R"({"schema_version":1,"experiment":"self_duality",)") +
                       R"("kernel":{"family":"tabulated","table_path":")" + path + R"("}})";
    ExperimentConfig cfg = parse_config(json);
    CHECK(cfg.kernel.family == KernelFamily::Tabulated);
    REQUIRE(cfg.kernel.table != nullptr);
    CHECK(cfg.kernel.table->n == 5);
    CHECK(cfg.table_path == path);
    CHECK(config_to_json(cfg).find(path) != std::string::npos);

    std::string missing = std::string(R"({"schema_version":1,"experiment":"self_duality",)") +
                          R"("kernel":{"family":"tabulated","table_path":"/no/such.qtab"}})";
    CHECK_THROWS_AS(parse_config(missing), std::runtime_error);
}

TEST_CASE("report serialization formats") {
    Report r;
    r.experiment = "demo";
    r.csv_header = {"a", "b"};
    r.rows = {{"1", "x"}, {"2.5", "y"}};
    r.gates.push_back(GateResult{"g1", 0.5, 1.0, true, "note"});
    r.fits.emplace_back("zeta", 1.5);
    r.runtime_s = 3.25;

    CHECK(r.csv() == "a,b\n1,x\n2.5,y\n");
    CHECK(r.all_pass());

    std::string s = r.summary_json();
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(s);
    CHECK(j["experiment"] == "demo");
    CHECK(j["gates"][0]["name"] == "g1");
    CHECK(j["gates"][0]["pass"] == true);
    CHECK(j["gates"][0]["note"] == "note");
    CHECK(j["fits"]["zeta"] == 1.5);
    CHECK(j["runtime_s"] == 3.25);
    // the only timing is the last key, so diffing modulo that line is easy
    CHECK(s.find("\"runtime_s\": 3.25\n}") != std::string::npos);

    r.gates.push_back(GateResult{"g2", 2.0, 1.0, false, ""});
    CHECK(!r.all_pass());
}

TEST_CASE("crossing curve: deterministic, thread-independent, seed-sensitive") {
    ExperimentConfig cfg = default_config("crossing_curve");
    cfg.scales = {8};
    cfg.levels = {-0.1, 0.0, 0.1};
    cfg.n_trials = 40;
    cfg.master_seed = 2;

    Report r1 = run_experiment(cfg);
    REQUIRE(r1.csv_header.size() == 7);
    REQUIRE(r1.rows.size() == 4);   // three levels plus the resolution diagnostic
    for (const auto& row : r1.rows) CHECK(row.size() == 7);
    CHECK(r1.rows[3][0] == "resolution_diag");

    const GateResult* mono = find_gate(r1, "monotone_levels");
    REQUIRE(mono != nullptr);
    CHECK(mono->pass);   // levels share each trial's field, so this is exact
    CHECK(find_gate(r1, "resolution_flip_rate") != nullptr);

    Report r2 = run_experiment(cfg);
    CHECK(r1.csv() == r2.csv());
    CHECK(strip_runtime(r1.summary_json()) == strip_runtime(r2.summary_json()));

    thread_override().store(2);
    Report r3 = run_experiment(cfg);
    thread_override().store(0);
    CHECK(r3.csv() == r1.csv());

    cfg.master_seed = 3;
    Report r4 = run_experiment(cfg);
    CHECK(r4.csv() != r1.csv());

    ExperimentConfig bad = cfg;
    bad.scales = {8.3};
    CHECK(error_mentions([&] { run_experiment(bad); }, "whole pixel count"));
    bad = cfg;
    bad.levels = {0.2, 0.1};
    CHECK(error_mentions([&] { run_experiment(bad); }, "strictly increasing"));
    bad = cfg;
    bad.levels.clear();
    CHECK(error_mentions([&] { run_experiment(bad); }, "at least one level"));
}

TEST_CASE("self duality driver on a small square") {
    ExperimentConfig cfg = default_config("self_duality");
    cfg.scales = {16};
    cfg.n_trials = 2000;
    cfg.master_seed = 5;
    Report rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 1);
    const GateResult* g = find_gate(rep, "self_dual_dev");
    REQUIRE(g != nullptr);
    CHECK(g->threshold == 0.02);
    CHECK(g->pass);
    // the csv row repeats the gate's inputs
    CHECK(rep.rows[0][0] == "16");
    CHECK(std::strtod(rep.rows[0][3].c_str(), nullptr) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("arm decay driver fits a positive exponent") {
    ExperimentConfig cfg = default_config("arm_decay");
    cfg.scales = {2, 4};
    cfg.rho1_px = 6;
    cfg.n_trials = 400;
    cfg.master_seed = 3;
    Report rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0][1] == "3");   // rho1 = rho1_px * eps
    CHECK(rep.rows[0][2] == "6");
    CHECK(rep.rows[1][2] == "12");
    const GateResult* g = find_gate(rep, "arm_exponent");
    REQUIRE(g != nullptr);
    CHECK(g->pass);
    bool have_fit = false;
    for (const auto& [name, value] : rep.fits)
        if (name == "arm_d") {
            have_fit = true;
            CHECK(value > 0.0);
        }
    CHECK(have_fit);

    ExperimentConfig bad = cfg;
    bad.scales = {2};
    CHECK(error_mentions([&] { run_experiment(bad); }, "at least two"));
    bad = cfg;
    bad.scales = {1.0, 2.0};
    CHECK(error_mentions([&] { run_experiment(bad); }, "exceed 1"));
}

TEST_CASE("validation of the remaining drivers") {
    // quasi_independence
    ExperimentConfig q = default_config("quasi_independence");
    q.truncation_radii.clear();
    CHECK(error_mentions([&] { run_experiment(q); }, "needs a truncation radius"));
    q = default_config("quasi_independence");
    q.truncation_radii = {4.0};   // exceeds the smallest separation R * eps = 2
    CHECK(error_mentions([&] { run_experiment(q); }, "must not exceed"));

    // near_critical
    ExperimentConfig nc = default_config("near_critical");
    nc.scales_fine = {16, 24, 32};
    CHECK(error_mentions([&] { run_experiment(nc); }, "at least five fine scales"));
    nc = default_config("near_critical");
    nc.exponents.c1 = 1.0;
    CHECK(error_mentions([&] { run_experiment(nc); }, "c1 must exceed 1"));
    nc = default_config("near_critical");
    nc.exponents.c2 = -0.5;
    CHECK(error_mentions([&] { run_experiment(nc); }, "c2 must be nonnegative"));

    // sprinkling
    ExperimentConfig sp = default_config("sprinkling");
    sp.exponents.theta = 0.51;   // cap is min(gamma, (beta - 1) h) = 0.5
    CHECK(error_mentions([&] { run_experiment(sp); }, "too aggressive"));
    sp = default_config("sprinkling");
    sp.scales = {2, 8};
    CHECK(error_mentions([&] { run_experiment(sp); }, "at least 4"));
    sp = default_config("sprinkling");
    sp.scales = {16};
    CHECK(error_mentions([&] { run_experiment(sp); }, "at least two scales"));
    sp = default_config("sprinkling");
    sp.exponents.h = -1.0;
    CHECK(error_mentions([&] { run_experiment(sp); }, "exponents must be positive"));

    // sup_norm_tail
    ExperimentConfig sn = default_config("sup_norm_tail");
    sn.scales = {1.0, 4.0};
    CHECK(error_mentions([&] { run_experiment(sn); }, "at least 2"));
    sn = default_config("sup_norm_tail");
    sn.scales = {3.7};
    CHECK_THROWS_AS(run_experiment(sn), std::invalid_argument);

    // cameron_martin
    ExperimentConfig cm = default_config("cameron_martin");
    cm.levels.clear();
    CHECK(error_mentions([&] { run_experiment(cm); }, "between one and eight"));
    cm = default_config("cameron_martin");
    cm.levels = {-0.01, 0.02};
    CHECK(error_mentions([&] { run_experiment(cm); }, "must be positive"));

    // bootstrap_recursion
    ExperimentConfig bs = default_config("bootstrap_recursion");
    bs.bootstrap.horizon = 7;
    CHECK(error_mentions([&] { run_experiment(bs); }, "at least 8"));
    bs = default_config("bootstrap_recursion");
    bs.bootstrap.exp_r0 = 3.0;
    CHECK(error_mentions([&] { run_experiment(bs); }, "exp_r0 must exceed 3"));
    bs = default_config("bootstrap_recursion");
    bs.bootstrap.poly_a0 = 0.0;
    CHECK(error_mentions([&] { run_experiment(bs); }, "constants must be positive"));
}

TEST_CASE("sup norm tail driver on a small ball") {
    ExperimentConfig cfg = default_config("sup_norm_tail");
    cfg.scales = {4};
    cfg.n_trials = 1500;
    cfg.master_seed = 4;
    Report rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 4);   // three log multiples plus the fixed far point
    const GateResult* far = find_gate(rep, "far_tail_small");
    REQUIRE(far != nullptr);
    CHECK(far->pass);
    CHECK(find_gate(rep, "log_tail_concave") != nullptr);
    bool have_m = false;
    for (const auto& [name, value] : rep.fits)
        if (name == "m_scale") {
            have_m = true;
            // unit-amplitude kernel: field and gradient variances are all one
            CHECK(value == doctest::Approx(1.0).epsilon(1e-4));
        }
    CHECK(have_m);
}

TEST_CASE("cameron martin driver measures a linear doubling response") {
    ExperimentConfig cfg = default_config("cameron_martin");
    cfg.scales = {8};
    cfg.levels = {0.01, 0.02};
    cfg.n_trials = 8000;
    cfg.master_seed = 6;
    Report rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 2);
    const GateResult* rb = find_gate(rep, "response_bounded");
    REQUIRE(rb != nullptr);
    CHECK(rb->pass);
    CHECK(find_gate(rep, "doubling_linear") != nullptr);
}

TEST_CASE("bootstrap recursion matches a linear-space replay") {
    ExperimentConfig cfg = default_config("bootstrap_recursion");
    cfg.bootstrap.horizon = 8;
    Report rep = run_experiment(cfg);
    REQUIRE(rep.rows.size() == 18);   // (1 + 8) rows per recursion

    const BootstrapParams& bp = cfg.bootstrap;
    // doubling-scale recursion in plain arithmetic
    {
        double a = bp.exp_a0, R = bp.exp_r0;
        std::size_t row = 0;
        REQUIRE(rep.rows[row][0] == "exp");
        CHECK(std::abs(std::strtod(rep.rows[row][3].c_str(), nullptr) - std::log(a)) < 1e-12);
        for (int it = 1; it <= 8; ++it) {
            a = bp.exp_c1 * a * a + std::exp(-bp.exp_c2 * R);
            double lr = std::log(R);
            R = 2 * (R + R / (lr * lr));
            if (a < 1e-290) break;   // linear replay underflows before the log-space run
            ++row;
            REQUIRE(rep.rows[row][0] == "exp");
            CHECK(rep.rows[row][1] == std::to_string(it));
            double la = std::strtod(rep.rows[row][3].c_str(), nullptr);
            double rr = std::strtod(rep.rows[row][2].c_str(), nullptr);
            CHECK(std::abs(rr - R) <= 1e-9 * R);
            CHECK(std::abs(la - std::log(a)) <= 1e-9 * std::max(1.0, std::abs(la)));
        }
    }
    // tripling-scale recursion in plain arithmetic
    {
        double a = bp.poly_a0, m = bp.poly_r1;
        std::size_t row = 9;
        REQUIRE(rep.rows[row][0] == "poly");
        CHECK(std::abs(std::strtod(rep.rows[row][3].c_str(), nullptr) - std::log(a)) < 1e-12);
        for (int it = 1; it <= 8; ++it) {
            double lm = std::log(m);
            a = bp.poly_c1 * a * a + std::pow(m, -bp.poly_c2) * a +
                std::exp(-bp.poly_c2 * lm * lm);
            m *= 3.0;
            ++row;
            REQUIRE(rep.rows[row][0] == "poly");
            double la = std::strtod(rep.rows[row][3].c_str(), nullptr);
            CHECK(std::abs(la - std::log(a)) <= 1e-9 * std::max(1.0, std::abs(la)));
        }
    }

    // at the default horizon both certificates hold
    Report full = run_experiment(default_config("bootstrap_recursion"));
    const GateResult* ec = find_gate(full, "exp_certificate");
    const GateResult* pc = find_gate(full, "poly_certificate");
    const GateResult* gb = find_gate(full, "exp_growth_bounded");
    REQUIRE(ec != nullptr);
    REQUIRE(pc != nullptr);
    REQUIRE(gb != nullptr);
    CHECK(ec->pass);
    CHECK(pc->pass);
    CHECK(gb->pass);
    CHECK(full.all_pass());
}

TEST_CASE("report files carry a content hash and the resolved config") {
    ExperimentConfig cfg = default_config("bootstrap_recursion");
    Report rep = run_experiment(cfg);
    std::string out_dir = tmp_path("report_out");
    ReportFiles files = write_report(rep, cfg, "myconf.json", out_dir);

    CHECK(files.csv_path == out_dir + "/bootstrap_recursion.csv");
    CHECK(files.summary_path == out_dir + "/bootstrap_recursion_summary.json");
    CHECK(files.manifest_path == out_dir + "/manifest.json");

    std::string csv_text = read_text_file(files.csv_path);
    std::string summary_text = read_text_file(files.summary_path);
    CHECK(csv_text == rep.csv());
    CHECK(summary_text == rep.summary_json());

    nlohmann::ordered_json man = nlohmann::ordered_json::parse(read_text_file(files.manifest_path));
    CHECK(man["experiment"] == "bootstrap_recursion");
    CHECK(man["config_path"] == "myconf.json");
    CHECK(man["content_hash"] == fnv1a_hex(csv_text + summary_text));
    CHECK(man["config"]["experiment"] == "bootstrap_recursion");
    CHECK(man["config"]["schema_version"] == 1);
    CHECK(nlohmann::ordered_json::parse(config_to_json(cfg)) == man["config"]);
}
