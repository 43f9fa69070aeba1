#pragma once
// Influence machinery around the exploration algorithm: resampling influences
// (probability that redrawing one noise coordinate flips an event), Russo
// influences E[eta_v 1_A], the constant linking the two, the variance /
// revealment-influence audit, and the derivative-in-level identity check.

#include "gfp/explorer.hpp"
#include "gfp/field.hpp"
#include "gfp/noise.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace gfp {

// Event as a deterministic function of a noise window.
using NoiseEvent = std::function<bool(const WhiteNoise&)>;

// Adapter for any revealment algorithm: (noise, algorithm seed) -> trace.
using TraceRunner = std::function<ExplorationTrace(const WhiteNoise&, uint64_t)>;

// Geometry and budget of a Monte Carlo ensemble over one noise window.
struct EnsembleSpec {
    long ivx0 = 0, ivy0 = 0;
    int nvx = 0, nvy = 0;
    double eps = 1.0;
    uint64_t master_seed = 1;
    long n_trials = 1000;
};

EnsembleSpec ensemble_from_grid(const GridSpec& grid, uint64_t master_seed, long n_trials);

// Trial's noise; independent across trials, reproducible by (master_seed, trial).
WhiteNoise ensemble_noise(const EnsembleSpec& spec, long trial);

// Fresh value for one coordinate, independent of the trial's base noise.
double resample_value(const WhiteNoise& noise, int wi, int wj);

struct InfluenceEstimate {
    std::vector<double> resampling, resampling_se;  // per-vertex flip rates
    std::vector<double> russo, russo_se;            // per-vertex E[eta_v 1_A]
    long n = 0;
};

InfluenceEstimate influence_resampling(const NoiseEvent& event, const EnsembleSpec& spec);
InfluenceEstimate influence_russo(const NoiseEvent& event, const EnsembleSpec& spec);

// sup over a >= 0 of P[Z >= a] / E[Z 1_{Z >= a}], located numerically.
struct MillsConstant {
    double value = 0;
    double argmax = 0;
};
MillsConstant mills_constant();

// Variance of the event indicator against the revealment-weighted resampling
// influences of a determining algorithm.  The algorithm's output is checked
// against the event evaluator on a subsample; disagreement is an error.
struct OsssAudit {
    double p_hat = 0;
    double var_hat = 0, var_se = 0;     // LHS: p(1-p)
    double rhs = 0, rhs_se = 0;         // sum_v delta_v * I_v
    double margin = 0, margin_se = 0;   // rhs - var_hat
    long n_algo = 0, n_influence = 0;
};
OsssAudit osss_audit(const NoiseEvent& event, const TraceRunner& algo,
                     const EnsembleSpec& spec, long n_algo_runs);

// Monotone event evaluated on a field at a given level.
using LevelEvent = std::function<bool(const FieldSample&, double level)>;

// d/dl P[event at level l]: centred finite difference with common random
// numbers on the left, (eps/||q||_1) * sum_v E[eta_v 1_A] on the right.
// Requires a nonnegative kernel and an event increasing in the field.
struct RussoCheck {
    double lhs = 0, lhs_se = 0;
    double rhs = 0, rhs_se = 0;
    double rel_gap = 0;
    double p_at_level = 0;
};
RussoCheck russo_derivative_check(const SynthesisRequest& req, const GridSpec& grid,
                                  const LevelEvent& event, double level, double h,
                                  uint64_t master_seed, long n_trials);

} // namespace gfp
