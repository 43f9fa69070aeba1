#pragma once
// White noise on the vertex lattice.  One standard normal per vertex, a pure
// function of (seed, vertex integer coordinates): enlarging the window keeps
// every previously drawn value.

#include "gfp/grid.hpp"

#include <cstdint>
#include <vector>

namespace gfp {

struct WhiteNoise {
    long ivx0 = 0, ivy0 = 0;   // lattice coordinates of the window's lower-left vertex
    int nvx = 0, nvy = 0;
    double eps = 0;
    uint64_t seed = 0;
    std::vector<double> values;  // raster, y-major bottom-up

    std::size_t window_index(int i, int j) const {
        return static_cast<std::size_t>(j) * nvx + i;
    }
    double at_window(int i, int j) const { return values[window_index(i, j)]; }
    bool covers(long gx0, long gy0, int nx, int ny) const {
        return gx0 >= ivx0 && gy0 >= ivy0 && gx0 + nx <= ivx0 + nvx && gy0 + ny <= ivy0 + nvy;
    }
    double at_vertex(long gx, long gy) const {
        return at_window(static_cast<int>(gx - ivx0), static_cast<int>(gy - ivy0));
    }
};

// Fills the vertex window of `grid` (pixels plus padding ring).
WhiteNoise sample_noise(const GridSpec& grid, uint64_t seed);

// Noise over an explicit vertex window.
WhiteNoise sample_noise_window(long ivx0, long ivy0, int nvx, int nvy, double eps,
                               uint64_t seed);

// Block-sum coarsening to mesh 2*eps: each coarse value is half the sum of its
// 2x2 block of children, so unit variance is preserved.  Requires even window
// dimensions and an even window origin.
WhiteNoise coarsen_noise(const WhiteNoise& fine);

} // namespace gfp
