#include "gfp/field.hpp"

#include "gfp/noise.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

using namespace gfp;
using doctest::Approx;

namespace {

SynthesisRequest request(KernelSpec k, std::optional<CutoffSpec> cut = std::nullopt,
                         MultiIndex deriv = {}, ConvEngine engine = ConvEngine::Fft) {
    return SynthesisRequest{std::move(k), cut, deriv, engine, TapMode::Midpoint};
}

} // namespace

TEST_CASE("grid construction and padding arithmetic") {
    GridSpec g(0.5, Rect{0, 8, -2, 2}, 1.1);
    CHECK(g.nx() == 16);
    CHECK(g.ny() == 8);
    CHECK(g.ix0() == 0);
    CHECK(g.iy0() == -4);
    CHECK(g.pad_px() == 3);     // ceil(1.1 / 0.5)
    CHECK(g.nvx() == 22);
    CHECK(g.ivx0() == -3);
    CHECK(g.x_of(2) == 1.0);
    CHECK(g.y_of(0) == -2.0);
    CHECK(GridSpec(0.5, Rect{0, 8, 0, 8}, 1.0).pad_px() == 2);  // exact multiple
    CHECK(GridSpec(0.5, Rect{0, 8, 0, 8}, 0.0).pad_px() == 0);
    CHECK_THROWS(GridSpec(0.5, Rect{0, 4.3, 0, 4}, 1.0));   // off-lattice corner
    CHECK_THROWS(GridSpec(0.5, Rect{0, 4, 4, 4}, 1.0));     // empty extent
    CHECK_THROWS(GridSpec(-0.5, Rect{0, 4, 0, 4}, 1.0));
}

TEST_CASE("tap halfwidth uses floor of reach over mesh") {
    SynthesisRequest trunc = request(make_bargmann_fock(), CutoffSpec{4.0, 0.25});
    CHECK(tap_halfwidth(trunc, 1.0) == 2);     // reach 2.0
    CHECK(tap_halfwidth(trunc, 0.4) == 5);     // exact multiple stays put
    CHECK(tap_halfwidth(trunc, 0.3) == 6);     // floor(6.67)
    SynthesisRequest full = request(make_bargmann_fock());
    double sr = support_radius(full.kernel, std::nullopt);
    CHECK(tap_halfwidth(full, 0.5) == static_cast<int>(std::floor(sr / 0.5 + 1e-9)));
}

TEST_CASE("doubling the amplitude doubles every value bitwise") {
    GridSpec grid(0.5, Rect{0, 8, 0, 8}, support_radius(make_bargmann_fock(), std::nullopt));
    WhiteNoise noise = sample_noise(grid, 101);
    for (ConvEngine engine : {ConvEngine::Fft, ConvEngine::Direct}) {
        FieldSample f1 = synthesize(request(make_bargmann_fock(1.0), {}, {}, engine), noise, grid);
        FieldSample f2 = synthesize(request(make_bargmann_fock(2.0), {}, {}, engine), noise, grid);
        FieldSample fh = synthesize(request(make_bargmann_fock(0.5), {}, {}, engine), noise, grid);
        for (std::size_t i = 0; i < f1.values.size(); ++i) {
            CHECK(f2.values[i] == 2.0 * f1.values[i]);
            CHECK(fh.values[i] == 0.5 * f1.values[i]);
        }
    }
    // non-dyadic factors agree to rounding only
    FieldSample f1 = synthesize(request(make_bargmann_fock(1.0)), noise, grid);
    FieldSample f3 = synthesize(request(make_bargmann_fock(3.0)), noise, grid);
    for (std::size_t i = 0; i < f1.values.size(); ++i)
        CHECK(f3.values[i] == Approx(3.0 * f1.values[i]).epsilon(1e-12).scale(1e-12));
}

TEST_CASE("direct engine is exactly shift equivariant") {
    KernelSpec k = make_bargmann_fock();
    CutoffSpec cut{4.0, 0.25};
    GridSpec ga(0.5, Rect{0, 8, 0, 8}, 2.0);
    GridSpec gb(0.5, Rect{1, 9, -0.5, 7.5}, 2.0);   // shifted by (+2, -1) lattice steps
    WhiteNoise na = sample_noise(ga, 55);
    WhiteNoise nb = sample_noise(gb, 55);
    SynthesisRequest req = request(k, cut, {}, ConvEngine::Direct);
    FieldSample fa = synthesize(req, na, ga);
    FieldSample fb = synthesize(req, nb, gb);
    for (int j = 1; j < gb.ny(); ++j)
        for (int i = 0; i + 2 < ga.nx(); ++i)
            CHECK(fb.at(i, j) == fa.at(i + 2, j - 1));
}

TEST_CASE("fft and direct engines agree to near machine precision") {
    GridSpec grid(0.5, Rect{0, 8, 0, 8}, support_radius(make_bargmann_fock(), std::nullopt));
    WhiteNoise noise = sample_noise(grid, 7);
    for (auto cut : std::vector<std::optional<CutoffSpec>>{std::nullopt, CutoffSpec{4.0, 0.25}}) {
        for (MultiIndex d : {MultiIndex{0, 0}, MultiIndex{1, 0}}) {
            FieldSample ff = synthesize(request(make_bargmann_fock(), cut, d, ConvEngine::Fft),
                                        noise, grid);
            FieldSample fd = synthesize(request(make_bargmann_fock(), cut, d, ConvEngine::Direct),
                                        noise, grid);
            double worst = 0;
            for (std::size_t i = 0; i < ff.values.size(); ++i)
                worst = std::max(worst, std::abs(ff.values[i] - fd.values[i]));
            CHECK(worst <= 1e-12);
        }
    }
}

TEST_CASE("coupled difference is literally the difference of the two fields") {
    KernelSpec k = make_bargmann_fock();
    CutoffSpec r1{4.0, 0.25}, r2{6.0, 0.25};
    GridSpec grid(0.5, Rect{0, 4, 0, 4}, 3.0);
    WhiteNoise noise = sample_noise(grid, 9);
    SynthesisRequest base = request(k);
    FieldSample diff = coupled_difference(base, r1, r2, noise, grid);
    SynthesisRequest qa = base, qb = base;
    qa.truncation = r1;
    qb.truncation = r2;
    FieldSample fa = synthesize(qa, noise, grid);
    FieldSample fb = synthesize(qb, noise, grid);
    for (std::size_t i = 0; i < diff.values.size(); ++i)
        CHECK(diff.values[i] == fb.values[i] - fa.values[i]);
}

TEST_CASE("derivative field matches finite differences at the mesh rate") {
    KernelSpec k = make_bargmann_fock();
    auto rms_fd_gap = [&](double eps, uint64_t seed, MultiIndex d) {
        GridSpec grid(eps, Rect{0, 16, 0, 16}, support_radius(k, std::nullopt));
        WhiteNoise noise = sample_noise(grid, seed);
        FieldSample f = synthesize(request(k), noise, grid);
        FieldSample g = synthesize(request(k, {}, d), noise, grid);
        double acc = 0;
        long n = 0;
        for (int j = 1; j + 1 < grid.ny(); ++j)
            for (int i = 1; i + 1 < grid.nx(); ++i) {
                double fd = d.dx == 1 ? (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * eps)
                                      : (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * eps);
                acc += (fd - g.at(i, j)) * (fd - g.at(i, j));
                ++n;
            }
        return std::sqrt(acc / n);
    };
    double r25 = rms_fd_gap(0.25, 21, {1, 0});
    double r12 = rms_fd_gap(0.125, 22, {1, 0});
    CHECK(r25 > 0.02);
    CHECK(r25 < 0.07);              // second-order residual, scale eps^2/6 * |f'''|
    CHECK(r25 / r12 > 3.0);         // halving the mesh divides it by about 4
    CHECK(r25 / r12 < 5.0);
    double ry = rms_fd_gap(0.25, 23, {0, 1});
    CHECK(ry > 0.02);
    CHECK(ry < 0.07);
}

TEST_CASE("cell-average taps differ from midpoint taps by a small smoothing") {
    GridSpec grid(0.5, Rect{0, 8, 0, 8}, support_radius(make_bargmann_fock(), std::nullopt));
    WhiteNoise noise = sample_noise(grid, 3);
    SynthesisRequest mid = request(make_bargmann_fock());
    SynthesisRequest avg = mid;
    avg.taps = TapMode::CellAverage;
    FieldSample fm = synthesize(mid, noise, grid);
    FieldSample fa = synthesize(avg, noise, grid);
    double worst = 0;
    for (std::size_t i = 0; i < fm.values.size(); ++i)
        worst = std::max(worst, std::abs(fm.values[i] - fa.values[i]));
    CHECK(worst > 0.0);
    CHECK(worst < 0.5);
}

TEST_CASE("synthesis validates its inputs") {
    KernelSpec k = make_bargmann_fock();
    GridSpec grid(0.5, Rect{0, 4, 0, 4}, support_radius(k, std::nullopt));
    WhiteNoise noise = sample_noise(grid, 1);

    GridSpec bare(0.5, Rect{0, 4, 0, 4}, 0.0);
    WhiteNoise thin = sample_noise(bare, 1);
    CHECK_THROWS_AS(synthesize(request(k), thin, bare), std::invalid_argument);  // padding

    WhiteNoise wrong_mesh = sample_noise_window(0, 0, 40, 40, 0.25, 1);
    CHECK_THROWS_AS(synthesize(request(k), wrong_mesh, grid), std::invalid_argument);

    WhiteNoise small = sample_noise_window(0, 0, 4, 4, 0.5, 1);
    CHECK_THROWS_AS(synthesize(request(k), small, grid), std::invalid_argument);

    CHECK_THROWS_AS(synthesize(request(k, {}, MultiIndex{1, 1}), noise, grid),
                    std::invalid_argument);
}

TEST_CASE("field sample carries its provenance") {
    KernelSpec k = make_bargmann_fock();
    GridSpec grid(0.5, Rect{0, 4, 0, 4}, support_radius(k, std::nullopt));
    WhiteNoise noise = sample_noise(grid, 77);
    CutoffSpec cut{4.0, 0.25};
    FieldSample f = synthesize(request(k, cut), noise, grid);
    CHECK(f.grid == grid);
    CHECK(f.noise_seed == 77);
    REQUIRE(f.kernel.has_value());
    CHECK(f.kernel->family == KernelFamily::BargmannFock);
    REQUIRE(f.truncation.has_value());
    CHECK(f.truncation->radius == 4.0);
    CHECK(f.values.size() == grid.n_pixels());
    CHECK(f.at(3, 2) == f.values[grid.pixel_index(3, 2)]);
}

TEST_CASE("sup norm over a ball of sample points") {
    GridSpec grid(1.0, Rect{0, 4, 0, 4}, 0.0);
    FieldSample f{grid, std::vector<double>(16, 0.0)};
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) f.at(i, j) = static_cast<double>(i);
    CHECK(sup_norm(f, 2.0, 2.0, 1.9) == 3.0);   // reaches the i = 3 column
    CHECK(sup_norm(f, 2.0, 2.0, 0.9) == 2.0);   // only the centre point
    f.at(1, 1) = -9.0;
    CHECK(sup_norm(f, 2.0, 2.0, 1.45) == 9.0);  // absolute value, diagonal point
    CHECK_THROWS(sup_norm(f, 2.0, 2.0, 2.5));   // ball leaves the extent
    CHECK_THROWS(sup_norm(f, 2.5, 2.5, 0.05));  // no sample point inside
    CHECK_THROWS(sup_norm(f, 2.0, 2.0, -1.0));
}
