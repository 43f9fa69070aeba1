#include "gfp/noise.hpp"

#include "gfp/rng.hpp"

#include <stdexcept>

namespace gfp {

WhiteNoise sample_noise_window(long ivx0, long ivy0, int nvx, int nvy, double eps,
                               uint64_t seed) {
    if (nvx <= 0 || nvy <= 0) throw std::invalid_argument("sample_noise: empty window");
    if (!(eps > 0)) throw std::invalid_argument("sample_noise: eps must be positive");
    WhiteNoise w;
    w.ivx0 = ivx0;
    w.ivy0 = ivy0;
    w.nvx = nvx;
    w.nvy = nvy;
    w.eps = eps;
    w.seed = seed;
    w.values.resize(static_cast<std::size_t>(nvx) * nvy);
    std::size_t idx = 0;
    for (int j = 0; j < nvy; ++j) {
        int32_t gy = static_cast<int32_t>(ivy0 + j);
        for (int i = 0; i < nvx; ++i, ++idx)
            w.values[idx] = normal_at(seed, static_cast<int32_t>(ivx0 + i), gy);
    }
    return w;
}

WhiteNoise sample_noise(const GridSpec& grid, uint64_t seed) {
    return sample_noise_window(grid.ivx0(), grid.ivy0(), grid.nvx(), grid.nvy(),
                               grid.eps(), seed);
}

WhiteNoise coarsen_noise(const WhiteNoise& fine) {
    if (fine.nvx % 2 || fine.nvy % 2)
        throw std::invalid_argument("coarsen_noise: window dimensions must be even");
    if (fine.ivx0 % 2 || fine.ivy0 % 2)
        throw std::invalid_argument("coarsen_noise: window origin must be even");
    WhiteNoise c;
    c.ivx0 = fine.ivx0 / 2;
    c.ivy0 = fine.ivy0 / 2;
    c.nvx = fine.nvx / 2;
    c.nvy = fine.nvy / 2;
    c.eps = 2.0 * fine.eps;
    c.seed = fine.seed;
    c.values.resize(static_cast<std::size_t>(c.nvx) * c.nvy);
    for (int j = 0; j < c.nvy; ++j)
        for (int i = 0; i < c.nvx; ++i) {
            double s = (fine.at_window(2 * i, 2 * j) + fine.at_window(2 * i + 1, 2 * j)) +
                       (fine.at_window(2 * i, 2 * j + 1) + fine.at_window(2 * i + 1, 2 * j + 1));
            c.values[c.window_index(i, j)] = 0.5 * s;
        }
    return c;
}

} // namespace gfp
