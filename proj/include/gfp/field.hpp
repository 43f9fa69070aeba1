#pragma once
// Field synthesis: f(x) = eps * sum_v eta_v * q~(x - v) over the noise
// lattice, evaluated at every pixel of the grid.  q~ is the (optionally
// truncated, optionally differentiated) kernel sampled at cell centres.
//
// Two interchangeable convolution engines:
//   Fft     zero-padded linear convolution via FFT; the padding ring doubles
//           as the FFT guard band, so pixels never see wrap-around.  Default.
//   Direct  stencil summation in a fixed tap order; slower, but exactly
//           equivariant under integer shifts of the noise, which makes it the
//           reference in couplings and shift tests.
//
// Both engines are deterministic for a given input regardless of how many
// worker threads the surrounding code uses.

#include "gfp/grid.hpp"
#include "gfp/kernel.hpp"
#include "gfp/noise.hpp"

#include <optional>
#include <vector>

namespace gfp {

enum class ConvEngine { Fft, Direct };
enum class TapMode { Midpoint, CellAverage };

struct SynthesisRequest {
    KernelSpec kernel;
    std::optional<CutoffSpec> truncation;
    MultiIndex deriv{};
    ConvEngine engine = ConvEngine::Fft;
    TapMode taps = TapMode::Midpoint;  // CellAverage integrates q over each
                                       // cell; used as a test oracle
};

struct FieldSample {
    GridSpec grid;
    std::vector<double> values;  // raster over pixels, y-major bottom-up
    uint64_t noise_seed = 0;
    std::optional<KernelSpec> kernel;
    std::optional<CutoffSpec> truncation;
    MultiIndex deriv{};

    double at(int i, int j) const { return values[grid.pixel_index(i, j)]; }
    double& at(int i, int j) { return values[grid.pixel_index(i, j)]; }
};

// Number of tap rings for this request at mesh eps, and the padding check.
int tap_halfwidth(const SynthesisRequest& req, double eps);

FieldSample synthesize(const SynthesisRequest& req, const WhiteNoise& noise,
                       const GridSpec& grid);

// Difference field between truncation radii r2 and r1 on shared noise;
// bit-identical to synthesize(r2) - synthesize(r1) by construction.
FieldSample coupled_difference(const SynthesisRequest& base, const CutoffSpec& r1,
                               const CutoffSpec& r2, const WhiteNoise& noise,
                               const GridSpec& grid);

// Max |f| over pixel centres inside the closed ball; the ball must sit inside
// the grid extent.
double sup_norm(const FieldSample& f, double cx, double cy, double radius);

} // namespace gfp
