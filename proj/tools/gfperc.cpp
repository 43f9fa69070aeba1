// Command-line front end: sample a field, run an experiment, or run the
// acceptance suite.  Exit codes: 0 pass, 1 gate failure, 2 usage or config
// error, 3 IO failure.

#include "gfp/acceptance.hpp"
#include "gfp/experiments.hpp"
#include "gfp/field.hpp"
#include "gfp/io.hpp"
#include "gfp/kernel.hpp"
#include "gfp/noise.hpp"
#include "gfp/threads.hpp"
#include "gfp/topology.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace {

struct SampleArgs {
    std::string kernel = "bf";
    double beta = 0.0;
    double eps = 0.5;
    double extent = 16.0;
    uint64_t seed = 1;
    double level = 0.0;
    std::string out;
    std::string table;
    bool render = false;
};

int cmd_sample(const SampleArgs& a) {
    gfp::KernelSpec kernel;
    if (a.kernel == "bf" || a.kernel == "bargmann_fock") {
        kernel = gfp::make_bargmann_fock();
    } else if (a.kernel == "rq" || a.kernel == "rational_quadratic") {
        if (!(a.beta > 2.0))
            throw std::invalid_argument("--kernel rq needs --beta > 2");
        kernel = gfp::make_rational_quadratic(a.beta);
    } else if (a.kernel == "tabulated") {
        if (a.table.empty())
            throw std::invalid_argument("--kernel tabulated needs --table <qtab file>");
        auto table = std::make_shared<gfp::KernelTable>(gfp::read_qtab(a.table));
        kernel = gfp::make_tabulated(std::move(table));
    } else {
        throw std::invalid_argument("unknown kernel '" + a.kernel +
                                    "' (expected bf, rq or tabulated)");
    }
    if (!(a.eps > 0)) throw std::invalid_argument("--eps must be positive");
    if (!(a.extent > 0)) throw std::invalid_argument("--extent must be positive");

    gfp::GridSpec grid(a.eps, gfp::Rect{0, a.extent, 0, a.extent},
                       gfp::support_radius(kernel, std::nullopt));
    gfp::SynthesisRequest req{kernel, std::nullopt, gfp::MultiIndex{}, gfp::ConvEngine::Fft,
                              gfp::TapMode::Midpoint};
    gfp::WhiteNoise noise = gfp::sample_noise(grid, a.seed);
    gfp::FieldSample f = gfp::synthesize(req, noise, grid);
    gfp::write_field(a.out, f);
    std::printf("wrote %s (%d x %d pixels, eps %g)\n", a.out.c_str(), grid.nx(), grid.ny(),
                a.eps);
    if (a.render) {
        std::filesystem::path base(a.out);
        base.replace_extension();
        gfp::Mask mask = gfp::excursion_mask(f, a.level);
        std::string mask_path = base.string() + "_mask.pgm";
        std::string big_path = base.string() + "_largest.pgm";
        gfp::write_mask_pgm(mask_path, mask);
        gfp::write_mask_pgm(big_path, gfp::largest_component_mask(mask));
        std::printf("wrote %s and %s (level %g)\n", mask_path.c_str(), big_path.c_str(),
                    a.level);
    }
    return 0;
}

struct ExperimentArgs {
    std::string config;
    std::string out;
    long trials = 0;
};

int cmd_experiment(const ExperimentArgs& a) {
    // parse the whole config before touching the output directory, so a bad
    // config never leaves partial outputs behind
    std::string text = gfp::read_text_file(a.config);
    gfp::ExperimentConfig cfg = gfp::parse_config(text);
    if (a.trials > 0) cfg.n_trials = a.trials;

    gfp::Report rep = gfp::run_experiment(cfg);
    gfp::ReportFiles files = gfp::write_report(rep, cfg, a.config, a.out);

    for (const auto& g : rep.gates)
        std::printf("gate %-24s %s  value %.6g  threshold %.6g%s%s\n", g.name.c_str(),
                    g.pass ? "pass" : "FAIL", g.value, g.threshold,
                    g.note.empty() ? "" : "  ", g.note.c_str());
    std::printf("wrote %s\nwrote %s\nwrote %s\n", files.csv_path.c_str(),
                files.summary_path.c_str(), files.manifest_path.c_str());
    return rep.all_pass() ? 0 : 1;
}

struct VerifyArgs {
    std::string profile = "quick";
    std::string out;
};

int cmd_verify(const VerifyArgs& a) {
    gfp::AcceptProfile profile;
    if (a.profile == "quick")
        profile = gfp::AcceptProfile::Quick;
    else if (a.profile == "full")
        profile = gfp::AcceptProfile::Full;
    else
        throw std::invalid_argument("--profile must be quick or full");

    auto results = gfp::run_acceptance(profile, [](const gfp::CriterionResult& r) {
        if (r.skipped)
            std::printf("[%2d] %-26s skip\n", r.id, r.name.c_str());
        else
            std::printf("[%2d] %-26s %s  (%.1fs)  %s\n", r.id, r.name.c_str(),
                        r.pass ? "pass" : "FAIL", r.seconds, r.detail.c_str());
        std::fflush(stdout);
    });
    std::string json = gfp::acceptance_json(results);
    if (a.out.empty())
        std::fputs(json.c_str(), stdout);
    else
        gfp::write_text_file(a.out, json);
    return gfp::acceptance_pass(results) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gaussian level-set percolation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: GFPERC_THREADS or cores)");

    SampleArgs sa;
    CLI::App* sample = app.add_subcommand("sample", "synthesize one field and dump it");
    sample->add_option("--kernel", sa.kernel, "kernel family: bf, rq or tabulated");
    sample->add_option("--beta", sa.beta, "tail exponent for rq");
    sample->add_option("--table", sa.table, "QTAB file for tabulated");
    sample->add_option("--eps", sa.eps, "lattice mesh");
    sample->add_option("--extent", sa.extent, "side of the square domain [0, extent]^2");
    sample->add_option("--seed", sa.seed, "noise seed");
    sample->add_option("--level", sa.level, "excursion level for --render");
    sample->add_option("--out", sa.out, "output field path")->required();
    sample->add_flag("--render", sa.render, "also write excursion mask and largest-component PGMs");

    ExperimentArgs ea;
    CLI::App* experiment = app.add_subcommand("experiment", "run one experiment from a config");
    experiment->add_option("--config", ea.config, "JSON config path")->required();
    experiment->add_option("--out", ea.out, "output directory")->required();
    experiment->add_option("--trials", ea.trials, "override n_trials");

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("--profile", va.profile, "quick or full");
    verify->add_option("--out", va.out, "write the result JSON here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (threads > 0) gfp::thread_override().store(threads);

    try {
        if (sample->parsed()) return cmd_sample(sa);
        if (experiment->parsed()) return cmd_experiment(ea);
        return cmd_verify(va);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
