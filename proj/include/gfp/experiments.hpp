#pragma once
// Experiment drivers.  Each driver runs a deterministic Monte Carlo study and
// returns a Report: CSV rows, pass/fail gates with pinned thresholds, and any
// fitted quantities.  Results depend only on the config (seed included), not
// on the worker count.
//
// Experiments:
//   crossing_curve       crossing probability vs level and scale, plus a
//                        mesh-halving stability diagnostic
//   self_duality         (primal LR + dual LR)/2 on squares, mean 1/2
//   arm_decay            annulus one-arm probability vs radius ratio
//   quasi_independence   covariance of distant crossings, truncated vs not
//   near_critical        level curves l(s): steep decay, slow decay, critical
//   sprinkling           truncated+discretised vs continuum proxy with a
//                        doubled level margin
//   sup_norm_tail        P[sup |f| over a ball >= m R2] vs R2
//   cameron_martin       level-shift response of crossing probabilities
//   bootstrap_recursion  numeric certificate for two recursive tail bounds

#include "gfp/kernel.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gfp {

struct BootstrapParams {
    // doubling-scale recursion a' = c1 a^2 + exp(-c2 R)
    double exp_c1 = 49.0, exp_c2 = 0.1, exp_a0 = 1e-3, exp_r0 = 100.0;
    // tripling-scale recursion a' = c1 a^2 + m^-c2 a + exp(-c2 log^2 m)
    double poly_c1 = 2.0, poly_c2 = 1.0, poly_a0 = 0.01, poly_r1 = 100.0;
    int horizon = 40;
};

struct ExperimentExponents {
    double theta = 0.3;   // sprinkling level exponent: level = R^-theta
    double h = 0.5;       // sprinkling truncation exponent: r = R^h
    double gamma = 0.5;   // sprinkling mesh exponent: eps = R^-gamma
    double c1 = 2.0;      // near_critical steep curve: level = (s eps)^-c1
    double c2 = 0.0;      // near_critical slow curve; 0 selects a fixed level
};

struct ExperimentConfig {
    std::string experiment;
    KernelSpec kernel = make_bargmann_fock();
    std::string table_path;              // source of a tabulated kernel, if any
    double eps = 0.5;
    std::vector<double> scales;          // meaning is per-experiment (see README)
    std::vector<double> scales_fine;     // near_critical slow-curve scale grid
    std::vector<double> levels;
    std::vector<double> truncation_radii;
    double rho1_px = 8.0;                // arm_decay inner radius in pixels
    long n_trials = 1000;
    uint64_t master_seed = 1;
    ExperimentExponents exponents;
    BootstrapParams bootstrap;
};

const std::vector<std::string>& experiment_names();

// Per-experiment defaults; throws on an unknown name.
ExperimentConfig default_config(const std::string& experiment);

// Strict parse: schema_version must be 1, the experiment must be known, every
// key must be recognised (unknown keys are an error naming the key), values
// must have the right types.  Unspecified keys fall back to the experiment's
// defaults.  Throws std::runtime_error / std::invalid_argument on any problem.
ExperimentConfig parse_config(const std::string& json_text);

// Resolved config (defaults applied) as a JSON string; echoed in manifests.
std::string config_to_json(const ExperimentConfig& cfg);

struct GateResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string note;
};

struct Report {
    std::string experiment;
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> rows;
    std::vector<GateResult> gates;
    std::vector<std::pair<std::string, double>> fits;
    double runtime_s = 0.0;

    bool all_pass() const;
    std::string csv() const;           // byte-stable across runs and threads
    std::string summary_json() const;  // runtime_s is the only timing, last key
};

Report run_experiment(const ExperimentConfig& cfg);

// Writes <experiment>.csv, <experiment>_summary.json and manifest.json into
// out_dir (created if needed).  The manifest carries the resolved config, a
// content hash of the outputs, and the only wall-clock timestamp.
struct ReportFiles {
    std::string csv_path;
    std::string summary_path;
    std::string manifest_path;
};
ReportFiles write_report(const Report& rep, const ExperimentConfig& cfg,
                         const std::string& config_path, const std::string& out_dir);

} // namespace gfp
