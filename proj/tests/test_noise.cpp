#include "gfp/noise.hpp"

#include "gfp/rng.hpp"

#include "doctest.h"

#include <cmath>

using namespace gfp;
using doctest::Approx;

TEST_CASE("noise is reproducible and matches the per-vertex generator") {
    GridSpec grid(0.5, Rect{0, 4, -2, 2}, 1.1);
    WhiteNoise a = sample_noise(grid, 17);
    WhiteNoise b = sample_noise(grid, 17);
    CHECK(a.values == b.values);
    CHECK(a.ivx0 == grid.ivx0());
    CHECK(a.ivy0 == grid.ivy0());
    CHECK(a.nvx == grid.nvx());
    CHECK(a.nvy == grid.nvy());
    CHECK(a.eps == 0.5);

    for (int j = 0; j < a.nvy; j += 3)
        for (int i = 0; i < a.nvx; i += 3)
            CHECK(a.at_window(i, j) ==
                  normal_at(17, static_cast<int32_t>(a.ivx0 + i),
                            static_cast<int32_t>(a.ivy0 + j)));
    CHECK(sample_noise(grid, 18).values != a.values);
}

TEST_CASE("enlarging the window keeps previously drawn values") {
    WhiteNoise small = sample_noise_window(0, 0, 8, 8, 1.0, 5);
    WhiteNoise big = sample_noise_window(-4, -2, 20, 16, 1.0, 5);
    for (long gy = 0; gy < 8; ++gy)
        for (long gx = 0; gx < 8; ++gx)
            CHECK(small.at_vertex(gx, gy) == big.at_vertex(gx, gy));
}

TEST_CASE("covers reports window containment") {
    WhiteNoise w = sample_noise_window(-2, 3, 10, 6, 1.0, 1);
    CHECK(w.covers(-2, 3, 10, 6));
    CHECK(w.covers(0, 4, 5, 3));
    CHECK_FALSE(w.covers(-3, 3, 10, 6));
    CHECK_FALSE(w.covers(-2, 3, 11, 6));
    CHECK_FALSE(w.covers(-2, 2, 1, 1));
}

TEST_CASE("coarsening is the exact half block sum") {
    WhiteNoise unit;
    unit.ivx0 = 0;
    unit.ivy0 = 0;
    unit.nvx = 2;
    unit.nvy = 2;
    unit.eps = 1.0;
    unit.values = {1.0, 1.0, 1.0, 1.0};
    WhiteNoise c = coarsen_noise(unit);
    CHECK(c.nvx == 1);
    CHECK(c.nvy == 1);
    CHECK(c.eps == 2.0);
    CHECK(c.values[0] == 2.0);

    WhiteNoise fine = sample_noise_window(4, -6, 8, 10, 0.5, 33);
    WhiteNoise coarse = coarsen_noise(fine);
    CHECK(coarse.ivx0 == 2);
    CHECK(coarse.ivy0 == -3);
    CHECK(coarse.nvx == 4);
    CHECK(coarse.nvy == 5);
    CHECK(coarse.eps == 1.0);
    for (int j = 0; j < coarse.nvy; ++j)
        for (int i = 0; i < coarse.nvx; ++i) {
            double want = 0.5 * ((fine.at_window(2 * i, 2 * j) + fine.at_window(2 * i + 1, 2 * j)) +
                                 (fine.at_window(2 * i, 2 * j + 1) +
                                  fine.at_window(2 * i + 1, 2 * j + 1)));
            CHECK(coarse.at_window(i, j) == want);
        }
}

TEST_CASE("coarsening preserves unit variance") {
    WhiteNoise fine = sample_noise_window(0, 0, 400, 400, 0.25, 7);
    WhiteNoise coarse = coarsen_noise(fine);
    double sum = 0, sum2 = 0;
    long n = static_cast<long>(coarse.nvx) * coarse.nvy;
    for (double v : coarse.values) {
        sum += v;
        sum2 += v * v;
    }
    double mean = sum / n, var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("coarsening validates parity of window and origin") {
    CHECK_THROWS(coarsen_noise(sample_noise_window(0, 0, 7, 8, 1.0, 1)));
    CHECK_THROWS(coarsen_noise(sample_noise_window(0, 0, 8, 7, 1.0, 1)));
    CHECK_THROWS(coarsen_noise(sample_noise_window(1, 0, 8, 8, 1.0, 1)));
    CHECK_THROWS(coarsen_noise(sample_noise_window(0, -3, 8, 8, 1.0, 1)));
    CHECK_NOTHROW(coarsen_noise(sample_noise_window(-4, 2, 8, 8, 1.0, 1)));
}

TEST_CASE("sample_noise rejects degenerate requests") {
    CHECK_THROWS(sample_noise_window(0, 0, 0, 4, 1.0, 1));
    CHECK_THROWS(sample_noise_window(0, 0, 4, 4, 0.0, 1));
}
