#pragma once
// Randomised exploration of the dual crossing event on [0, 2R] x [0, R].
//
// The algorithm picks a horizontal seed line at height k * r (k uniform on
// {0, ..., floor(R/r)}), reveals the noise within 2r of it, and then grows the
// revealed region around the frontier of the "safe blocked" set: pixels whose
// field value is already determined (every noise vertex within distance r is
// revealed) and which lie in the complement of the excursion set, connected to
// the seed line with dual (8-)connectivity.  It stops with output 0 when such
// a blocked path joins the bottom and top edges, and with output 1 when the
// frontier dies, i.e. no blocked crossing can appear any more.  The output
// always equals the fully-revealed verdict of "no dual bottom-top crossing".
//
// Requires a truncated kernel, so field values really are determined by
// nearby noise.

#include "gfp/field.hpp"
#include "gfp/noise.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gfp {

struct ExploreParams {
    KernelSpec kernel;
    CutoffSpec truncation;   // radius r; safety distance is r as well
    double eps = 0;
    double R = 0;            // rectangle is [0, 2R] x [0, R]
    double level = 0;
};

GridSpec explorer_grid(const ExploreParams& p);

struct ExplorationTrace {
    int output = 0;              // 1 = no dual crossing can exist
    int k = 0;                   // seed line index, line at height k * r
    long n_revealed = 0;
    std::vector<int32_t> reveal_order;  // linear indices into the grid vertex window
    std::vector<uint8_t> revealed;      // per vertex of the grid vertex window
};

ExplorationTrace explore_crossing(const WhiteNoise& noise, const ExploreParams& p,
                                  uint64_t algo_seed);

// Verdict from the fully revealed field: 1 iff no dual bottom-top crossing.
int full_reveal_verdict(const WhiteNoise& noise, const ExploreParams& p);

struct Revealment {
    std::vector<double> delta;   // per-vertex reveal frequency
    std::vector<double> se;
    double max_delta = 0;
    double max_delta_se = 0;
    long n_runs = 0;
    int nvx = 0, nvy = 0;
};
Revealment revealment(std::span<const ExplorationTrace> traces);

} // namespace gfp
