#include "gfp/kernel.hpp"

#include "gfp/convolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace gfp {

namespace {

constexpr double kPi = 3.141592653589793238462643;
constexpr double kSqrt2OverPi = 0.7978845608028653558798921;  // sqrt(2/pi)

double radial_q(const KernelSpec& k, double s) {
    switch (k.family) {
        case KernelFamily::RationalQuadratic:
            return k.amplitude * std::pow(1.0 + s * s, -0.5 * k.beta);
        case KernelFamily::BargmannFock:
            return k.amplitude * kSqrt2OverPi * std::exp(-s * s);
        default:
            throw std::logic_error("radial_q on tabulated kernel");
    }
}

// d/ds of the radial profile
double radial_dq(const KernelSpec& k, double s) {
    switch (k.family) {
        case KernelFamily::RationalQuadratic:
            return k.amplitude * -k.beta * s * std::pow(1.0 + s * s, -0.5 * k.beta - 1.0);
        case KernelFamily::BargmannFock:
            return k.amplitude * kSqrt2OverPi * -2.0 * s * std::exp(-s * s);
        default:
            throw std::logic_error("radial_dq on tabulated kernel");
    }
}

double bilinear(const KernelTable& t, double x, double y) {
    double gx = x / t.mesh + t.n / 2;
    double gy = y / t.mesh + t.n / 2;
    if (gx < 0 || gy < 0 || gx > t.n - 1 || gy > t.n - 1) return 0.0;
    int i0 = std::min(static_cast<int>(gx), t.n - 2);
    int j0 = std::min(static_cast<int>(gy), t.n - 2);
    double fx = gx - i0, fy = gy - j0;
    auto v = [&](int i, int j) { return t.values[static_cast<size_t>(j) * t.n + i]; };
    return (1 - fy) * ((1 - fx) * v(i0, j0) + fx * v(i0 + 1, j0)) +
           fy * ((1 - fx) * v(i0, j0 + 1) + fx * v(i0 + 1, j0 + 1));
}

// Adaptive Simpson on [a, b].
template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Integrate f over [a, inf) by doubling panels until they stop contributing.
template <class F>
double integrate_tail(const F& f, double a, double rel_tol) {
    double total = 0.0;
    double lo = a, hi = std::max(2.0 * std::abs(a), a + 1.0);
    for (int i = 0; i < 64; ++i) {
        // anchor the panel tolerance to a crude panel estimate, so it never
        // collapses to zero before anything has accumulated
        double est = (hi - lo) * (std::abs(f(lo)) + std::abs(f(0.5 * (lo + hi))) +
                                  std::abs(f(hi)));
        double panel_tol = rel_tol * std::max({std::abs(total), est, 1e-60});
        double chunk = integrate(f, lo, hi, panel_tol);
        total += chunk;
        if (std::abs(chunk) <= rel_tol * std::max(std::abs(total), 1e-300) && i > 2)
            break;
        lo = hi;
        hi *= 2.0;
    }
    return total;
}

struct RadiusKey {
    int family;
    double beta, amplitude;
    const void* table;
    bool operator<(const RadiusKey& o) const {
        return std::tie(family, beta, amplitude, table) <
               std::tie(o.family, o.beta, o.amplitude, o.table);
    }
};
std::mutex radius_cache_mutex;
std::map<RadiusKey, double> radius_cache;

} // namespace

KernelSpec make_rational_quadratic(double beta, double amplitude) {
    KernelSpec k;
    k.family = KernelFamily::RationalQuadratic;
    k.beta = beta;
    k.amplitude = amplitude;
    validate_kernel(k);
    return k;
}

KernelSpec make_bargmann_fock(double amplitude) {
    KernelSpec k;
    k.family = KernelFamily::BargmannFock;
    k.amplitude = amplitude;
    validate_kernel(k);
    return k;
}

KernelSpec make_tabulated(std::shared_ptr<const KernelTable> table, double amplitude) {
    KernelSpec k;
    k.family = KernelFamily::Tabulated;
    k.table = std::move(table);
    k.amplitude = amplitude;
    validate_kernel(k);
    return k;
}

void validate_kernel(const KernelSpec& k) {
    if (!(k.amplitude > 0) || !std::isfinite(k.amplitude))
        throw std::invalid_argument("kernel amplitude must be positive and finite");
    switch (k.family) {
        case KernelFamily::RationalQuadratic:
            if (!(k.beta > 2.0))
                throw std::invalid_argument(
                    "rational-quadratic decay exponent must exceed 2 (integrability)");
            break;
        case KernelFamily::BargmannFock:
            break;
        case KernelFamily::Tabulated:
            if (!k.table || k.table->n < 3 ||
                k.table->values.size() != static_cast<size_t>(k.table->n) * k.table->n ||
                !(k.table->mesh > 0))
                throw std::invalid_argument("tabulated kernel needs an n x n table, n >= 3");
            break;
    }
}

void validate_cutoff(const CutoffSpec& c) {
    if (!(c.width > 0)) throw std::invalid_argument("cutoff width must be positive");
    if (!(c.radius > 2.0 * c.width))
        throw std::invalid_argument("cutoff radius must exceed twice the transition width");
}

double cutoff_weight(const CutoffSpec& c, double d) {
    double edge = 0.5 * c.radius;
    if (d >= edge) return 0.0;
    if (d <= edge - c.width) return 1.0;
    double t = (edge - d) / c.width;  // 0 at the outer edge, 1 at the plateau
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// d(cutoff)/dd, zero outside the transition band.
static double cutoff_weight_ddist(const CutoffSpec& c, double d) {
    double edge = 0.5 * c.radius;
    if (d >= edge || d <= edge - c.width) return 0.0;
    double t = (edge - d) / c.width;
    double ds = 30.0 * t * t * (t - 1.0) * (t - 1.0);
    return -ds / c.width;
}

double eval_q(const KernelSpec& k, double x, double y) {
    if (k.family == KernelFamily::Tabulated)
        return k.amplitude * bilinear(*k.table, x, y);
    return radial_q(k, std::sqrt(x * x + y * y));
}

double eval_dq(const KernelSpec& k, MultiIndex alpha, double x, double y) {
    if (alpha.dx < 0 || alpha.dy < 0 || alpha.order() > 1)
        throw std::invalid_argument("eval_dq: derivative order must be 0 or 1");
    if (alpha.order() == 0) return eval_q(k, x, y);
    if (k.family == KernelFamily::Tabulated) {
        // central difference at half the table mesh
        double h = 0.5 * k.table->mesh;
        if (alpha.dx == 1)
            return (eval_q(k, x + h, y) - eval_q(k, x - h, y)) / (2.0 * h);
        return (eval_q(k, x, y + h) - eval_q(k, x, y - h)) / (2.0 * h);
    }
    double s = std::sqrt(x * x + y * y);
    if (s == 0.0) return 0.0;  // radial profiles have zero gradient at the origin
    double g = radial_dq(k, s) / s;
    return alpha.dx == 1 ? g * x : g * y;
}

double eval_truncated_q(const KernelSpec& k, const CutoffSpec& c, double x, double y) {
    double d = std::sqrt(x * x + y * y);
    double w = cutoff_weight(c, d);
    if (w == 0.0) return 0.0;
    double q = eval_q(k, x, y);
    return w == 1.0 ? q : q * w;
}

double eval_truncated_dq(const KernelSpec& k, const CutoffSpec& c, MultiIndex alpha,
                         double x, double y) {
    if (alpha.order() == 0) return eval_truncated_q(k, c, x, y);
    double d = std::sqrt(x * x + y * y);
    double w = cutoff_weight(c, d);
    if (w == 0.0) return 0.0;
    double dq = eval_dq(k, alpha, x, y);
    if (w == 1.0) return dq;
    double wd = cutoff_weight_ddist(c, d);
    double dir = d > 0 ? (alpha.dx == 1 ? x / d : y / d) : 0.0;
    return dq * w + eval_q(k, x, y) * wd * dir;
}

namespace {

// 2-D integral of fn over the plane for tabulated kernels: midpoint sum over
// the table lattice (the table carries the whole numerical support).
template <class F>
double table_integral(const KernelTable& t, const F& fn) {
    double acc = 0.0;
    for (int j = 0; j < t.n; ++j)
        for (int i = 0; i < t.n; ++i) {
            double x = (i - t.n / 2) * t.mesh, y = (j - t.n / 2) * t.mesh;
            acc += fn(x, y);
        }
    return acc * t.mesh * t.mesh;
}

} // namespace

double l1_norm(const KernelSpec& k) {
    validate_kernel(k);
    if (k.family == KernelFamily::Tabulated)
        return table_integral(*k.table,
                              [&](double x, double y) { return std::abs(eval_q(k, x, y)); });
    if (k.family == KernelFamily::RationalQuadratic && !(k.beta > 2.0))
        throw std::invalid_argument("l1_norm diverges for decay exponent <= 2");
    auto f = [&](double s) { return 2.0 * kPi * s * std::abs(radial_q(k, s)); };
    return integrate(f, 0.0, 8.0, 1e-12) + integrate_tail(f, 8.0, 1e-12);
}

double l1_norm_truncated(const KernelSpec& k, const CutoffSpec& c) {
    validate_kernel(k);
    validate_cutoff(c);
    if (k.family == KernelFamily::Tabulated)
        return table_integral(*k.table, [&](double x, double y) {
            return std::abs(eval_truncated_q(k, c, x, y));
        });
    auto f = [&](double s) {
        return 2.0 * kPi * s * std::abs(radial_q(k, s)) * cutoff_weight(c, s);
    };
    return integrate(f, 0.0, 0.5 * c.radius, 1e-12);
}

double covariance_at(const KernelSpec& k, double x, double y, double quad_eps) {
    validate_kernel(k);
    if (!(quad_eps > 0)) throw std::invalid_argument("covariance_at: quadrature mesh must be positive");
    double rq = support_radius(k, std::nullopt);
    long K = static_cast<long>(std::floor(rq / quad_eps)) + 1;
    double acc = 0.0;
    for (long j = -K; j <= K; ++j) {
        double uy = j * quad_eps;
        double row = 0.0;
        for (long i = -K; i <= K; ++i) {
            double ux = i * quad_eps;
            row += eval_q(k, ux, uy) * eval_q(k, x - ux, y - uy);
        }
        acc += row;
    }
    return acc * quad_eps * quad_eps;
}

CovarianceTable covariance_table(const KernelSpec& k, const GridSpec& grid) {
    validate_kernel(k);
    CovarianceTable t{grid, std::vector<double>(grid.n_pixels(), 0.0)};
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            // mirror pixel of (i, j) through the origin, if it lies in the grid
            long mi = -(grid.ix0() + i) - grid.ix0();
            long mj = -(grid.iy0() + j) - grid.iy0();
            if (mi >= 0 && mi < grid.nx() && mj >= 0 && mj < grid.ny()) {
                size_t midx = grid.pixel_index(static_cast<int>(mi), static_cast<int>(mj));
                if (midx < grid.pixel_index(i, j)) {
                    t.values[grid.pixel_index(i, j)] = t.values[midx];
                    continue;
                }
            }
            t.values[grid.pixel_index(i, j)] =
                covariance_at(k, grid.x_of(i), grid.y_of(j), grid.eps());
        }
    }
    return t;
}

SpectralTable spectral_table(const KernelSpec& k, const GridSpec& grid) {
    validate_kernel(k);
    int nx = grid.nx(), ny = grid.ny();
    SpectralTable st;
    st.nx = nx;
    st.ny = ny;
    st.dsx = 1.0 / (nx * grid.eps());
    st.dsy = 1.0 / (ny * grid.eps());
    std::vector<std::complex<double>> a(static_cast<size_t>(nx) * ny);
    double kappa0 = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double v = eval_q(k, grid.x_of(i), grid.y_of(j));
            a[static_cast<size_t>(j) * nx + i] = v;
            kappa0 += v * v;
        }
    double cell = grid.eps() * grid.eps();
    st.kappa0 = kappa0 * cell;
    cfft2_inplace(a, ny, nx, false);
    st.rho.resize(a.size());
    st.rho2.resize(a.size());
    st.integral_rho2 = 0.0;
    // Continuous-transform reading of the DFT: undo the phase that comes from
    // the window's origin sitting at lattice coordinate (ix0, iy0), and centre
    // the frequency axes.
    for (int j = 0; j < ny; ++j) {
        long kys = j - ny / 2;
        for (int i = 0; i < nx; ++i) {
            long kxs = i - nx / 2;
            size_t src = static_cast<size_t>(((kys % ny) + ny) % ny) * nx +
                         static_cast<size_t>(((kxs % nx) + nx) % nx);
            double ph = -2.0 * kPi * (static_cast<double>(grid.ix0()) * kxs / nx +
                                      static_cast<double>(grid.iy0()) * kys / ny);
            std::complex<double> val =
                a[src] * std::complex<double>(std::cos(ph), std::sin(ph)) * cell;
            size_t dst = static_cast<size_t>(j) * nx + i;
            st.rho[dst] = val.real();
            st.rho2[dst] = val.real() * val.real();
            st.max_abs_imag = std::max(st.max_abs_imag, std::abs(val.imag()));
            st.integral_rho2 += st.rho2[dst];
        }
    }
    st.integral_rho2 *= st.dsx * st.dsy;
    return st;
}

double truncation_error_variance(const KernelSpec& k, const CutoffSpec& c) {
    validate_kernel(k);
    validate_cutoff(c);
    if (k.family == KernelFamily::Tabulated)
        return table_integral(*k.table, [&](double x, double y) {
            double d = eval_q(k, x, y) * (1.0 - cutoff_weight(c, std::hypot(x, y)));
            return d * d;
        });
    double a = 0.5 * c.radius - c.width;
    auto f = [&](double s) {
        double d = radial_q(k, s) * (1.0 - cutoff_weight(c, s));
        return 2.0 * kPi * s * d * d;
    };
    double transition = integrate(f, a, 0.5 * c.radius, 1e-14);
    auto tail = [&](double s) {
        double q = radial_q(k, s);
        return 2.0 * kPi * s * q * q;
    };
    return transition + integrate_tail(tail, 0.5 * c.radius, 1e-12);
}

double discretisation_error_l2(const KernelSpec& k, double eps) {
    validate_kernel(k);
    if (!(eps > 0)) throw std::invalid_argument("discretisation_error_l2: eps must be positive");
    // Accumulate per-cell variances ring by ring until rings stop contributing.
    const int m = 10;  // sub-samples per axis inside one cell
    const double sub = eps / m;
    double total = 0.0;
    double reach = support_radius(k, std::nullopt) + eps;
    long max_ring = static_cast<long>(std::ceil(reach / eps)) + 1;
    for (long ring = 0; ring <= max_ring; ++ring) {
        double ring_sum = 0.0;
        auto cell_var = [&](long ci, long cj) {
            double cx = ci * eps, cy = cj * eps;
            double samples[m * m];
            double mean = 0.0;
            for (int b = 0; b < m; ++b)
                for (int a2 = 0; a2 < m; ++a2) {
                    double v = eval_q(k, cx - 0.5 * eps + (a2 + 0.5) * sub,
                                      cy - 0.5 * eps + (b + 0.5) * sub);
                    samples[b * m + a2] = v;
                    mean += v;
                }
            mean /= (m * m);
            double acc = 0.0;
            for (double v : samples) acc += (v - mean) * (v - mean);
            return acc * sub * sub;
        };
        if (ring == 0) {
            ring_sum = cell_var(0, 0);
        } else {
            for (long i = -ring; i <= ring; ++i) {
                ring_sum += cell_var(i, ring) + cell_var(i, -ring);
            }
            for (long j = -ring + 1; j <= ring - 1; ++j) {
                ring_sum += cell_var(ring, j) + cell_var(-ring, j);
            }
        }
        total += ring_sum;
        if (ring > 2 && ring_sum < 1e-14 * total) break;
    }
    return total;
}

double numerical_infinity_radius(const KernelSpec& k) {
    validate_kernel(k);
    RadiusKey key{static_cast<int>(k.family), k.beta, k.amplitude, k.table.get()};
    {
        std::lock_guard<std::mutex> lock(radius_cache_mutex);
        auto it = radius_cache.find(key);
        if (it != radius_cache.end()) return it->second;
    }
    const double target = 1e-8;
    CutoffSpec c;
    double lo = 1.0, hi = 1.0;
    for (;;) {
        c.radius = hi;
        if (truncation_error_variance(k, c) < target) break;
        lo = hi;
        hi *= 2.0;
        if (hi > 1e7)
            throw std::invalid_argument("kernel tail too heavy for a numerical support radius");
    }
    while (hi - lo > 1e-3) {
        c.radius = 0.5 * (lo + hi);
        (truncation_error_variance(k, c) < target ? hi : lo) = c.radius;
    }
    std::lock_guard<std::mutex> lock(radius_cache_mutex);
    radius_cache[key] = hi;
    return hi;
}

double support_radius(const KernelSpec& k, const std::optional<CutoffSpec>& c) {
    if (c) {
        validate_cutoff(*c);
        return 0.5 * c->radius;
    }
    if (k.family == KernelFamily::Tabulated)
        return k.table->half_extent() * 1.4142135623730951 + k.table->mesh;
    return 0.5 * numerical_infinity_radius(k);
}

double derivative_variance(const KernelSpec& k, MultiIndex alpha, double quad_eps) {
    validate_kernel(k);
    if (!(quad_eps > 0)) throw std::invalid_argument("derivative_variance: bad mesh");
    double rq = support_radius(k, std::nullopt);
    long K = static_cast<long>(std::floor(rq / quad_eps)) + 1;
    double acc = 0.0;
    for (long j = -K; j <= K; ++j)
        for (long i = -K; i <= K; ++i) {
            double v = eval_dq(k, alpha, i * quad_eps, j * quad_eps);
            acc += v * v;
        }
    return acc * quad_eps * quad_eps;
}

AssumptionReport check_assumptions(const KernelSpec& k, const GridSpec& grid,
                                   std::optional<double> claimed_decay) {
    validate_kernel(k);
    AssumptionReport rep;
    double half_x = 0.5 * grid.extent().width(), half_y = 0.5 * grid.extent().height();
    double half = std::min(half_x, half_y);

    // D4 symmetry: compare q against its reflections and quarter-turns on a
    // spread of sample points.
    double qmax = std::abs(eval_q(k, 0, 0));
    rep.d4_symmetric = true;
    for (int ir = 1; ir <= 24 && rep.d4_symmetric; ++ir) {
        double r = half * ir / 24.0;
        for (int ia = 0; ia < 16; ++ia) {
            double th = 2.0 * kPi * (ia + 0.37) / 16.0;
            double x = r * std::cos(th), y = r * std::sin(th);
            double v = eval_q(k, x, y);
            qmax = std::max(qmax, std::abs(v));
            for (auto [tx, ty] : {std::pair{-x, y}, {x, -y}, {y, x}, {-y, -x}, {-x, -y}}) {
                if (std::abs(eval_q(k, tx, ty) - v) > 1e-9 * std::max(qmax, 1e-12)) {
                    rep.d4_symmetric = false;
                    break;
                }
            }
            if (!rep.d4_symmetric) break;
        }
    }

    // strong positivity: q >= 0 on a sample lattice over the grid
    rep.strongly_positive = true;
    int strideable = std::max(1, grid.nx() / 192);
    for (int j = 0; j < grid.ny() && rep.strongly_positive; j += strideable)
        for (int i = 0; i < grid.nx(); i += strideable) {
            if (eval_q(k, grid.x_of(i), grid.y_of(j)) < -1e-12 * std::max(qmax, 1e-12)) {
                rep.strongly_positive = false;
                break;
            }
        }

    // weak positivity of the covariance on probe points
    rep.weakly_positive_cov = true;
    double quad = std::max(grid.eps(), half / 64.0);
    for (int j = -6; j <= 6 && rep.weakly_positive_cov; ++j)
        for (int i = -6; i <= 6; ++i) {
            double x = half * i / 6.0, y = half * j / 6.0;
            if (covariance_at(k, x, y, quad) < -1e-9) {
                rep.weakly_positive_cov = false;
                break;
            }
        }

    // decay fit over dyadic annuli [2^kk, 2^(kk+1)], kk = 2..6, restricted to
    // the grid and to annuli where max(|q|, |grad q|) has not underflowed
    std::vector<double> lx, ly;
    double c_fit = 0.0;
    for (int kk = 2; kk <= 6; ++kk) {
        double inner = std::pow(2.0, kk);
        if (2.0 * inner > half + 1e-9) break;
        double mx = 0.0;
        for (int ir = 0; ir < 12; ++ir) {
            double r = inner * std::pow(2.0, ir / 12.0);
            for (int ia = 0; ia < 32; ++ia) {
                double th = 2.0 * kPi * (ia + 0.21) / 32.0;
                double x = r * std::cos(th), y = r * std::sin(th);
                double v = std::abs(eval_q(k, x, y));
                v = std::max(v, std::abs(eval_dq(k, {1, 0}, x, y)));
                v = std::max(v, std::abs(eval_dq(k, {0, 1}, x, y)));
                mx = std::max(mx, v);
            }
        }
        if (mx < 1e-280) continue;
        lx.push_back(std::log(inner));
        ly.push_back(std::log(mx));
    }
    rep.decay_annuli = static_cast<int>(lx.size());
    if (lx.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
        }
        double n = static_cast<double>(lx.size());
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.decay_exponent = -slope;
        c_fit = std::exp((sy - slope * sx) / n);
    } else {
        rep.decay_exponent = std::numeric_limits<double>::infinity();
    }
    rep.decay_constant = c_fit;
    rep.decay_exponent_ok =
        !claimed_decay || (rep.decay_annuli >= 2 &&
                           std::abs(rep.decay_exponent - *claimed_decay) <= 0.4);

    // spectral flags from the DFT table on this grid
    SpectralTable st = spectral_table(k, grid);
    double rho_max = 0.0;
    for (double r : st.rho) rho_max = std::max(rho_max, std::abs(r));
    rep.spectral_density_nonneg = true;
    for (double r : st.rho)
        if (r < -1e-9 * std::max(rho_max, 1e-12)) { rep.spectral_density_nonneg = false; break; }
    rep.spectral_positive_near_zero = true;
    for (int j = 0; j < st.ny; ++j)
        for (int i = 0; i < st.nx; ++i) {
            double sxf = (i - st.nx / 2) * st.dsx, syf = (j - st.ny / 2) * st.dsy;
            if (sxf * sxf + syf * syf <= 0.1 * 0.1 &&
                st.rho2[static_cast<size_t>(j) * st.nx + i] <= 1e-9) {
                rep.spectral_positive_near_zero = false;
            }
        }
    return rep;
}

} // namespace gfp
