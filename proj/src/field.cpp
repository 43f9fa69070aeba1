#include "gfp/field.hpp"

#include "gfp/convolve.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace gfp {

namespace {

double tap_value(const SynthesisRequest& req, double x, double y) {
    if (req.truncation)
        return eval_truncated_dq(req.kernel, *req.truncation, req.deriv, x, y);
    return eval_dq(req.kernel, req.deriv, x, y);
}

// Midpoint taps evaluate q~ at the cell centre; cell-average taps integrate it
// over the cell (16-point midpoint rule per axis).
double tap_at(const SynthesisRequest& req, double x, double y, double eps) {
    if (req.taps == TapMode::Midpoint) return tap_value(req, x, y);
    const int m = 16;
    double sub = eps / m, acc = 0.0;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a)
            acc += tap_value(req, x - 0.5 * eps + (a + 0.5) * sub,
                             y - 0.5 * eps + (b + 0.5) * sub);
    return acc / (m * m);
}

std::vector<double> build_taps(const SynthesisRequest& req, double eps, int K) {
    std::vector<double> taps(static_cast<std::size_t>(2 * K + 1) * (2 * K + 1));
    std::size_t idx = 0;
    for (int ky = -K; ky <= K; ++ky)
        for (int kx = -K; kx <= K; ++kx, ++idx)
            taps[idx] = tap_at(req, kx * eps, ky * eps, eps);
    return taps;
}

uint64_t dbits(double x) { return std::bit_cast<uint64_t>(x); }

struct SpectrumKey {
    int family;
    uint64_t beta, amplitude;
    const void* table;
    int truncated;
    uint64_t trunc_radius, trunc_width;
    int dx, dy, tapmode;
    uint64_t eps;
    int K, fy, fx;
    bool operator<(const SpectrumKey& o) const {
        return std::tie(family, beta, amplitude, table, truncated, trunc_radius, trunc_width,
                        dx, dy, tapmode, eps, K, fy, fx) <
               std::tie(o.family, o.beta, o.amplitude, o.table, o.truncated, o.trunc_radius,
                        o.trunc_width, o.dx, o.dy, o.tapmode, o.eps, o.K, o.fy, o.fx);
    }
};

std::mutex spectrum_mutex;
std::map<SpectrumKey, std::shared_ptr<const std::vector<std::complex<double>>>> spectrum_cache;

// Half-spectrum of the wrapped tap array, pre-scaled by eps / (fx * fy) so the
// inverse transform lands directly on eps * sum eta q~.
std::shared_ptr<const std::vector<std::complex<double>>> kernel_spectrum(
    const SynthesisRequest& req, double eps, int K, int fy, int fx) {
    SpectrumKey key{static_cast<int>(req.kernel.family),
                    dbits(req.kernel.beta),
                    dbits(req.kernel.amplitude),
                    req.kernel.table.get(),
                    req.truncation ? 1 : 0,
                    req.truncation ? dbits(req.truncation->radius) : 0,
                    req.truncation ? dbits(req.truncation->width) : 0,
                    req.deriv.dx,
                    req.deriv.dy,
                    static_cast<int>(req.taps),
                    dbits(eps),
                    K,
                    fy,
                    fx};
    {
        std::lock_guard<std::mutex> lock(spectrum_mutex);
        auto it = spectrum_cache.find(key);
        if (it != spectrum_cache.end()) return it->second;
    }
    std::vector<double> taps = build_taps(req, eps, K);
    std::vector<double> wrapped(static_cast<std::size_t>(fy) * fx, 0.0);
    std::size_t idx = 0;
    for (int ky = -K; ky <= K; ++ky) {
        int wy = ((ky % fy) + fy) % fy;
        for (int kx = -K; kx <= K; ++kx, ++idx) {
            int wx = ((kx % fx) + fx) % fx;
            wrapped[static_cast<std::size_t>(wy) * fx + wx] = taps[idx];
        }
    }
    auto spec = std::make_shared<std::vector<std::complex<double>>>(rfft2(wrapped, fy, fx));
    double scale = eps / (static_cast<double>(fx) * fy);
    for (auto& z : *spec) z *= scale;
    std::lock_guard<std::mutex> lock(spectrum_mutex);
    spectrum_cache[key] = spec;
    return spec;
}

void check_request(const SynthesisRequest& req, const WhiteNoise& noise,
                   const GridSpec& grid, int K) {
    validate_kernel(req.kernel);
    if (req.truncation) validate_cutoff(*req.truncation);
    if (req.deriv.dx < 0 || req.deriv.dy < 0 || req.deriv.order() > 1)
        throw std::invalid_argument("synthesize: derivative order must be 0 or 1");
    if (std::abs(noise.eps - grid.eps()) > 1e-12 * grid.eps())
        throw std::invalid_argument("synthesize: noise mesh does not match grid mesh");
    if (!noise.covers(grid.ivx0(), grid.ivy0(), grid.nvx(), grid.nvy()))
        throw std::invalid_argument("synthesize: noise window does not cover the grid's vertex window");
    if (grid.pad_px() < K) {
        std::ostringstream msg;
        msg << "synthesize: padding " << grid.padding() << " too small; the kernel reaches "
            << K << " cells (" << K * grid.eps() << " length units), need padding >= "
            << K * grid.eps();
        throw std::invalid_argument(msg.str());
    }
}

} // namespace

int tap_halfwidth(const SynthesisRequest& req, double eps) {
    double sr = support_radius(req.kernel, req.truncation);
    return static_cast<int>(std::floor(sr / eps + 1e-9));
}

FieldSample synthesize(const SynthesisRequest& req, const WhiteNoise& noise,
                       const GridSpec& grid) {
    int K = tap_halfwidth(req, grid.eps());
    check_request(req, noise, grid, K);

    FieldSample out{grid, std::vector<double>(grid.n_pixels(), 0.0), noise.seed,
                    req.kernel, req.truncation, req.deriv};
    const int nx = grid.nx(), ny = grid.ny(), pad = grid.pad_px();
    // offset of the grid's vertex window inside the (possibly larger) noise window
    const int ox = static_cast<int>(grid.ivx0() - noise.ivx0);
    const int oy = static_cast<int>(grid.ivy0() - noise.ivy0);

    if (req.engine == ConvEngine::Direct) {
        std::vector<double> taps = build_taps(req, grid.eps(), K);
        const int tw = 2 * K + 1;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                double acc = 0.0;
                std::size_t t = 0;
                for (int ky = -K; ky <= K; ++ky) {
                    const double* row = &noise.values[noise.window_index(ox + i + pad - K,
                                                                        oy + j + pad - ky)];
                    const double* trow = &taps[t];
                    double racc = 0.0;
                    for (int kx = 0; kx < tw; ++kx) racc += trow[tw - 1 - kx] * row[kx];
                    acc += racc;
                    t += tw;
                }
                out.at(i, j) = grid.eps() * acc;
            }
        }
        return out;
    }

    const int fx = next_fft_size(grid.nvx());
    const int fy = next_fft_size(grid.nvy());
    auto spec = kernel_spectrum(req, grid.eps(), K, fy, fx);
    std::vector<double> padded(static_cast<std::size_t>(fy) * fx, 0.0);
    for (int j = 0; j < grid.nvy(); ++j) {
        const double* src = &noise.values[noise.window_index(ox, oy + j)];
        std::memcpy(&padded[static_cast<std::size_t>(j) * fx], src,
                    sizeof(double) * grid.nvx());
    }
    std::vector<std::complex<double>> sp = rfft2(padded, fy, fx);
    for (std::size_t i = 0; i < sp.size(); ++i) sp[i] *= (*spec)[i];
    std::vector<double> conv = irfft2(sp, fy, fx);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            out.at(i, j) = conv[static_cast<std::size_t>(j + pad) * fx + (i + pad)];
    return out;
}

FieldSample coupled_difference(const SynthesisRequest& base, const CutoffSpec& r1,
                               const CutoffSpec& r2, const WhiteNoise& noise,
                               const GridSpec& grid) {
    SynthesisRequest a = base, b = base;
    a.truncation = r1;
    b.truncation = r2;
    FieldSample f1 = synthesize(a, noise, grid);
    FieldSample f2 = synthesize(b, noise, grid);
    for (std::size_t i = 0; i < f2.values.size(); ++i) f2.values[i] -= f1.values[i];
    f2.truncation.reset();
    return f2;
}

double sup_norm(const FieldSample& f, double cx, double cy, double radius) {
    if (!(radius > 0)) throw std::invalid_argument("sup_norm: radius must be positive");
    const Rect& e = f.grid.extent();
    if (cx - radius < e.x0 - 1e-9 || cx + radius > e.x1 + 1e-9 ||
        cy - radius < e.y0 - 1e-9 || cy + radius > e.y1 + 1e-9)
        throw std::invalid_argument("sup_norm: ball leaves the sampled extent");
    double best = 0.0;
    bool any = false;
    double r2 = radius * radius * (1.0 + 1e-12);
    for (int j = 0; j < f.grid.ny(); ++j) {
        double dy = f.grid.y_of(j) - cy;
        if (std::abs(dy) > radius) continue;
        for (int i = 0; i < f.grid.nx(); ++i) {
            double dx = f.grid.x_of(i) - cx;
            if (dx * dx + dy * dy <= r2) {
                best = std::max(best, std::abs(f.at(i, j)));
                any = true;
            }
        }
    }
    if (!any) throw std::invalid_argument("sup_norm: no pixel centres inside the ball");
    return best;
}

} // namespace gfp
