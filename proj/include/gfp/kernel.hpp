#pragma once
// Convolution kernels q and their analytics.  The field model is f = q * W
// (white noise smoothed by q), so everything downstream is controlled by a
// handful of kernel functionals: the covariance q * q, the spectral density
// (Fourier transform of q), L1/L2 norms, and the truncation / discretisation
// error integrals.
//
// Families:
//   RationalQuadratic  q(x) = amplitude * (1 + |x|^2)^(-beta/2), beta > 2
//   BargmannFock       q(x) = amplitude * sqrt(2/pi) * exp(-|x|^2), so that
//                      q * q at amplitude 1 is exp(-|x|^2 / 2)
//   Tabulated          bilinear interpolation of a centred square table
//
// Truncation multiplies q by a radial cutoff: 1 inside radius/2 - width,
// 0 outside radius/2, quintic smoothstep in between.

#include "gfp/grid.hpp"

#include <complex>
#include <memory>
#include <optional>
#include <vector>

namespace gfp {

enum class KernelFamily { RationalQuadratic, BargmannFock, Tabulated };

struct KernelTable {
    int n = 0;            // n x n samples, node (i, j) at ((i - n/2), (j - n/2)) * mesh
    double mesh = 0;
    std::vector<double> values;  // row-major, j (y) major
    double half_extent() const { return (n / 2) * mesh; }
};

struct KernelSpec {
    KernelFamily family = KernelFamily::BargmannFock;
    double beta = 0.0;       // RationalQuadratic only
    double amplitude = 1.0;
    std::shared_ptr<const KernelTable> table;  // Tabulated only
};

KernelSpec make_rational_quadratic(double beta, double amplitude = 1.0);
KernelSpec make_bargmann_fock(double amplitude = 1.0);
KernelSpec make_tabulated(std::shared_ptr<const KernelTable> table, double amplitude = 1.0);
void validate_kernel(const KernelSpec& k);

struct CutoffSpec {
    double radius = 0.0;     // support of the truncated kernel is |x| <= radius/2
    double width = 0.25;     // transition band [radius/2 - width, radius/2]
};
void validate_cutoff(const CutoffSpec& c);

// Quintic smoothstep cutoff weight at distance d from the origin.
double cutoff_weight(const CutoffSpec& c, double d);

double eval_q(const KernelSpec& k, double x, double y);
// Partial derivative of order <= 1 per axis (order() <= 1 total).
double eval_dq(const KernelSpec& k, MultiIndex alpha, double x, double y);
double eval_truncated_q(const KernelSpec& k, const CutoffSpec& c, double x, double y);
double eval_truncated_dq(const KernelSpec& k, const CutoffSpec& c, MultiIndex alpha,
                         double x, double y);

// Integral norms.  l1_norm diverges for decay exponents <= 2 and throws.
double l1_norm(const KernelSpec& k);
double l1_norm_truncated(const KernelSpec& k, const CutoffSpec& c);

// Pointwise covariance kappa(x) = int q(u) q(x - u) du, midpoint quadrature at
// mesh quad_eps over the full numerical support of q.
double covariance_at(const KernelSpec& k, double x, double y, double quad_eps);

struct CovarianceTable {
    GridSpec grid;
    std::vector<double> values;   // kappa at pixel centres, raster order
    double at(int i, int j) const { return values[grid.pixel_index(i, j)]; }
};
// Quadrature mesh = grid mesh.  Construction shares quadrature results between
// x and -x so the table is symmetric bit-for-bit where both pixels exist.
CovarianceTable covariance_table(const KernelSpec& k, const GridSpec& grid);

struct SpectralTable {
    int nx = 0, ny = 0;
    double dsx = 0, dsy = 0;          // frequency mesh per axis
    std::vector<double> rho;          // Re F[q] at ((kx - nx/2) dsx, (ky - ny/2) dsy)
    std::vector<double> rho2;         // rho^2
    double max_abs_imag = 0;          // residual imaginary part (window asymmetry)
    double integral_rho2 = 0;         // sum rho2 * dsx * dsy
    double kappa0 = 0;                // grid quadrature of int q^2, Parseval partner
    double parseval_gap() const {
        return std::abs(integral_rho2 - kappa0) / std::max(kappa0, 1e-300);
    }
};
// Tabulates q on the grid's pixels and takes a phase-corrected DFT.
SpectralTable spectral_table(const KernelSpec& k, const GridSpec& grid);

struct AssumptionReport {
    bool d4_symmetric = false;
    bool strongly_positive = false;       // q >= 0 on the test grid
    bool weakly_positive_cov = false;     // q * q >= 0 on probe points
    double decay_exponent = 0;            // fitted from annulus maxima of max(|q|, |grad q|)
    double decay_constant = 0;            // fitted prefactor (informational)
    int decay_annuli = 0;                 // number of dyadic annuli used
    bool decay_exponent_ok = true;        // |fit - claim| <= 0.4 when a claim is given
    bool spectral_density_nonneg = false;
    bool spectral_positive_near_zero = false;    // rho^2 > 1e-9 for |s| <= 0.1
    bool ok() const {
        return d4_symmetric && strongly_positive && weakly_positive_cov &&
               decay_exponent_ok && spectral_density_nonneg && spectral_positive_near_zero;
    }
};
AssumptionReport check_assumptions(const KernelSpec& k, const GridSpec& test_grid,
                                   std::optional<double> claimed_decay = std::nullopt);

// int (q - q * cutoff)^2 over the plane.
double truncation_error_variance(const KernelSpec& k, const CutoffSpec& c);

// L2 error of replacing q by its cell averages on an eps lattice:
// sum over cells of int_cell (q - cell_mean)^2.
double discretisation_error_l2(const KernelSpec& k, double eps);

// Smallest truncation radius with truncation_error_variance below 1e-8; used
// as the numerical-infinity proxy when synthesising without truncation.
double numerical_infinity_radius(const KernelSpec& k);

// Field-influence radius of one noise vertex: radius/2 when truncated,
// numerical_infinity_radius()/2 otherwise.
double support_radius(const KernelSpec& k, const std::optional<CutoffSpec>& c);

// E[(d^alpha f)^2] = int (d^alpha q)^2, needed for the sup-norm tail scale.
double derivative_variance(const KernelSpec& k, MultiIndex alpha, double quad_eps);

} // namespace gfp
