#include "gfp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfp {

double normal_pdf(double x) {
    return 0.3989422804014326779399461 * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244008444);
}

double normal_tail(double x) {
    return 0.5 * std::erfc(x * 0.7071067811865475244008444);
}

double mills_ratio(double a) {
    // erfc underflows near 38 sigma; switch to the asymptotic series there.
    if (a < 30.0) return normal_tail(a) / normal_pdf(a);
    double a2 = a * a;
    return (1.0 - 1.0 / a2 + 3.0 / (a2 * a2)) / a;
}

double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need n >= 2");
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

Binomial binomial_estimate(long k, long n) {
    if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("binomial_estimate: bad counts");
    Binomial b;
    b.k = k;
    b.n = n;
    b.p_hat = static_cast<double>(k) / static_cast<double>(n);
    double p = (static_cast<double>(k) + 1.0) / (static_cast<double>(n) + 2.0);
    double pq = std::max(b.p_hat * (1.0 - b.p_hat), p * (1.0 - p));
    b.se = std::sqrt(pq / static_cast<double>(n));
    return b;
}

static LinearFit fit_core(std::span<const double> x, std::span<const double> y,
                          const std::vector<double>& w, bool measurement_se) {
    std::size_t n = x.size();
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sw += w[i]; sx += w[i] * x[i]; sy += w[i] * y[i]; }
    double xb = sx / sw, yb = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - xb) * (x[i] - xb);
        sxy += w[i] * (x[i] - xb) * (y[i] - yb);
    }
    if (sxx <= 0) throw std::invalid_argument("linear fit: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = yb - f.slope * xb;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - f.intercept - f.slope * x[i];
        ss_res += w[i] * r * r;
        ss_tot += w[i] * (y[i] - yb) * (y[i] - yb);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (measurement_se) {
        f.slope_se = std::sqrt(1.0 / sxx);   // w[i] = 1/sigma_i^2
    } else {
        f.slope_se = n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2) / sxx) : 0.0;
    }
    return f;
}

LinearFit fit_ols(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_ols: bad sizes");
    std::vector<double> w(x.size(), 1.0);
    return fit_core(x, y, w, false);
}

LinearFit fit_wls(std::span<const double> x, std::span<const double> y,
                  std::span<const double> sigma2) {
    if (x.size() != y.size() || x.size() != sigma2.size() || x.size() < 2)
        throw std::invalid_argument("fit_wls: bad sizes");
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (sigma2[i] <= 0) throw std::invalid_argument("fit_wls: nonpositive variance");
        w[i] = 1.0 / sigma2[i];
    }
    return fit_core(x, y, w, true);
}

MannKendall mann_kendall(std::span<const double> v) {
    std::size_t n = v.size();
    if (n < 3) throw std::invalid_argument("mann_kendall: need n >= 3");
    MannKendall mk;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            mk.s += (v[j] > v[i]) - (v[j] < v[i]);
    // tie correction on the variance
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    double var = static_cast<double>(n) * (n - 1) * (2.0 * n + 5) / 18.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        double t = static_cast<double>(j - i);
        if (t > 1) var -= t * (t - 1) * (2 * t + 5) / 18.0;
        i = j;
    }
    if (var <= 0) {
        mk.z = 0.0;
    } else if (mk.s > 0) {
        mk.z = (mk.s - 1.0) / std::sqrt(var);
    } else if (mk.s < 0) {
        mk.z = (mk.s + 1.0) / std::sqrt(var);
    }
    mk.p_increasing = normal_tail(mk.z);
    return mk;
}

double jackknife_se(std::size_t n, const std::function<double(std::size_t)>& replicate) {
    if (n < 2) throw std::invalid_argument("jackknife_se: need n >= 2");
    std::vector<double> reps(n);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) { reps[i] = replicate(i); m += reps[i]; }
    m /= static_cast<double>(n);
    double s = 0.0;
    for (double r : reps) s += (r - m) * (r - m);
    return std::sqrt(s * static_cast<double>(n - 1) / static_cast<double>(n));
}

double log_sum_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

} // namespace gfp
