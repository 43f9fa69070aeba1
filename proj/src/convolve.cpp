#include "gfp/convolve.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace gfp {

int next_fft_size(int n) {
    if (n < 1) throw std::invalid_argument("next_fft_size: n must be positive");
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

namespace {

std::mutex planner_mutex;

struct PlanSet {
    int ny = 0, nx = 0;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;
    fftw_plan fwd = nullptr;   // r2c
    fftw_plan inv = nullptr;   // c2r
    fftw_complex* zbuf = nullptr;
    fftw_plan cfwd = nullptr;  // c2c forward
    fftw_plan cinv = nullptr;  // c2c backward

    void ensure_real(int ny_, int nx_) {
        if (fwd && ny == ny_ && nx == nx_) return;
        release_real();
        ny = ny_; nx = nx_;
        std::lock_guard<std::mutex> lock(planner_mutex);
        rbuf = fftw_alloc_real(static_cast<size_t>(ny) * nx);
        cbuf = fftw_alloc_complex(static_cast<size_t>(ny) * (nx / 2 + 1));
        fwd = fftw_plan_dft_r2c_2d(ny, nx, rbuf, cbuf, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_2d(ny, nx, cbuf, rbuf, FFTW_ESTIMATE);
        if (!fwd || !inv) throw std::runtime_error("fftw plan creation failed");
    }
    void ensure_complex(int ny_, int nx_, bool inverse) {
        if (zbuf && czy == ny_ && czx == nx_) {
            if (inverse ? (cinv != nullptr) : (cfwd != nullptr)) return;
        } else {
            release_complex();
            czy = ny_; czx = nx_;
            std::lock_guard<std::mutex> lock(planner_mutex);
            zbuf = fftw_alloc_complex(static_cast<size_t>(czy) * czx);
        }
        std::lock_guard<std::mutex> lock(planner_mutex);
        if (inverse && !cinv)
            cinv = fftw_plan_dft_2d(czy, czx, zbuf, zbuf, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!inverse && !cfwd)
            cfwd = fftw_plan_dft_2d(czy, czx, zbuf, zbuf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    int czy = 0, czx = 0;

    void release_real() {
        std::lock_guard<std::mutex> lock(planner_mutex);
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        if (rbuf) fftw_free(rbuf);
        if (cbuf) fftw_free(cbuf);
        fwd = inv = nullptr; rbuf = nullptr; cbuf = nullptr;
    }
    void release_complex() {
        std::lock_guard<std::mutex> lock(planner_mutex);
        if (cfwd) fftw_destroy_plan(cfwd);
        if (cinv) fftw_destroy_plan(cinv);
        if (zbuf) fftw_free(zbuf);
        cfwd = cinv = nullptr; zbuf = nullptr;
    }
    ~PlanSet() { release_real(); release_complex(); }
};

// One plan set per thread per size keyed by (ny, nx); sizes recur heavily
// inside an experiment, so this amortises planning to nothing.
thread_local std::map<std::pair<int, int>, PlanSet> tl_real_plans;
thread_local std::map<std::pair<int, int>, PlanSet> tl_complex_plans;

} // namespace

std::vector<std::complex<double>> rfft2(const std::vector<double>& a, int ny, int nx) {
    if (a.size() != static_cast<size_t>(ny) * nx)
        throw std::invalid_argument("rfft2: size mismatch");
    PlanSet& ps = tl_real_plans[{ny, nx}];
    ps.ensure_real(ny, nx);
    std::copy(a.begin(), a.end(), ps.rbuf);
    fftw_execute(ps.fwd);
    size_t nc = static_cast<size_t>(ny) * (nx / 2 + 1);
    std::vector<std::complex<double>> out(nc);
    for (size_t i = 0; i < nc; ++i) out[i] = {ps.cbuf[i][0], ps.cbuf[i][1]};
    return out;
}

std::vector<double> irfft2(const std::vector<std::complex<double>>& s, int ny, int nx) {
    size_t nc = static_cast<size_t>(ny) * (nx / 2 + 1);
    if (s.size() != nc) throw std::invalid_argument("irfft2: size mismatch");
    PlanSet& ps = tl_real_plans[{ny, nx}];
    ps.ensure_real(ny, nx);
    for (size_t i = 0; i < nc; ++i) { ps.cbuf[i][0] = s[i].real(); ps.cbuf[i][1] = s[i].imag(); }
    fftw_execute(ps.inv);
    return std::vector<double>(ps.rbuf, ps.rbuf + static_cast<size_t>(ny) * nx);
}

void cfft2_inplace(std::vector<std::complex<double>>& a, int ny, int nx, bool inverse) {
    if (a.size() != static_cast<size_t>(ny) * nx)
        throw std::invalid_argument("cfft2_inplace: size mismatch");
    PlanSet& ps = tl_complex_plans[{ny, nx}];
    ps.ensure_complex(ny, nx, inverse);
    for (size_t i = 0; i < a.size(); ++i) { ps.zbuf[i][0] = a[i].real(); ps.zbuf[i][1] = a[i].imag(); }
    fftw_execute(inverse ? ps.cinv : ps.cfwd);
    for (size_t i = 0; i < a.size(); ++i) a[i] = {ps.zbuf[i][0], ps.zbuf[i][1]};
    return;
}

} // namespace gfp
