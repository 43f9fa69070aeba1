#include "gfp/experiments.hpp"

#include "gfp/field.hpp"
#include "gfp/io.hpp"
#include "gfp/noise.hpp"
#include "gfp/rng.hpp"
#include "gfp/stats.hpp"
#include "gfp/threads.hpp"
#include "gfp/topology.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <limits>
#include <stdexcept>

namespace gfp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_g(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}
std::string fmt_i(long v) { return std::to_string(v); }

[[noreturn]] void bad_config(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

int px_count(double v, const char* what) {
    double r = std::nearbyint(v);
    if (std::abs(v - r) > 1e-9 || r < 1)
        bad_config(std::string(what) + " must be a positive whole pixel count (got " +
                   fmt_g(v) + ")");
    return static_cast<int>(r);
}

void require_ascending(const std::vector<double>& v, const char* what) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) bad_config(std::string(what) + " must be strictly increasing");
}

GateResult gate(std::string name, double value, double threshold, bool pass,
                std::string note = "") {
    return GateResult{std::move(name), value, threshold, pass, std::move(note)};
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// One seed stream per experiment so re-ordering the suite never changes runs.
uint64_t experiment_master(const ExperimentConfig& cfg, int exp_id) {
    return derive_seed(cfg.master_seed, static_cast<uint64_t>(exp_id), 0x65787065u);
}

struct TrialSeeds {
    uint64_t master;
    uint64_t operator()(long trial, uint64_t tag) const {
        return derive_seed(master, static_cast<uint64_t>(trial), tag);
    }
};

std::optional<CutoffSpec> config_truncation(const ExperimentConfig& cfg) {
    if (cfg.truncation_radii.empty()) return std::nullopt;
    return CutoffSpec{cfg.truncation_radii.front(), 0.25};
}

// ---------------------------------------------------------------- crossing_curve

void run_crossing_curve(const ExperimentConfig& cfg, TrialSeeds seed, Report& rep) {
    if (cfg.scales.empty()) bad_config("crossing_curve needs at least one scale");
    require_ascending(cfg.scales, "scales");
    if (cfg.levels.empty()) bad_config("crossing_curve needs at least one level");
    require_ascending(cfg.levels, "levels");

    const double eps = cfg.eps;
    const auto trunc = config_truncation(cfg);
    const long n = cfg.n_trials;
    const int L = static_cast<int>(cfg.levels.size());
    const double pad = support_radius(cfg.kernel, trunc);
    SynthesisRequest req{cfg.kernel, trunc, MultiIndex{}, ConvEngine::Fft, TapMode::Midpoint};

    rep.csv_header = {"kind", "scale_px", "level", "n", "count", "estimate", "se"};

    std::vector<std::vector<long>> counts(cfg.scales.size(), std::vector<long>(L, 0));
    for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        int s = px_count(cfg.scales[si], "scale");
        Rect extent{0.0, 2.0 * s * eps, 0.0, 1.0 * s * eps};
        GridSpec grid(eps, extent, pad);
        std::vector<uint8_t> bits(static_cast<std::size_t>(n) * L, 0);
        parallel_for(n, [&](long t) {
            WhiteNoise noise = sample_noise(grid, seed(t, si));
            FieldSample f = synthesize(req, noise, grid);
            for (int li = 0; li < L; ++li) {
                CrossingQuery q{extent, CrossDirection::LeftRight, Side::Primal, cfg.levels[li]};
                bits[static_cast<std::size_t>(t) * L + li] = crossing(f, q) ? 1 : 0;
            }
        });
        for (long t = 0; t < n; ++t)
            for (int li = 0; li < L; ++li)
                counts[si][li] += bits[static_cast<std::size_t>(t) * L + li];
        for (int li = 0; li < L; ++li) {
            Binomial b = binomial_estimate(counts[si][li], n);
            rep.rows.push_back({"crossing", fmt_g(cfg.scales[si]), fmt_g(cfg.levels[li]),
                                fmt_i(n), fmt_i(b.k), fmt_g(b.p_hat), fmt_g(b.se)});
        }
    }

    // levels share the trial's field, so the curve is monotone exactly
    double worst_drop = 0.0;
    for (std::size_t si = 0; si < cfg.scales.size(); ++si)
        for (int li = 0; li + 1 < L; ++li)
            worst_drop = std::max(worst_drop,
                                  (counts[si][li] - counts[si][li + 1]) / static_cast<double>(n));
    rep.gates.push_back(gate("monotone_levels", worst_drop, 0.0, worst_drop <= 0.0,
                             "max drop of p_hat between adjacent levels; exact via shared seeds"));

    auto find_level = [&](double v) -> int {
        for (int li = 0; li < L; ++li)
            if (std::abs(cfg.levels[li] - v) <= 1e-12) return li;
        return -1;
    };
    int lo = find_level(-0.1), hi = find_level(0.1);
    if (lo >= 0 && hi >= 0) {
        std::size_t si = cfg.scales.size() - 1;
        double rise = (counts[si][hi] - counts[si][lo]) / static_cast<double>(n);
        rep.gates.push_back(gate("sharp_rise", rise, 0.5, rise >= 0.5,
                                 "p_hat(0.1) - p_hat(-0.1) at the largest scale"));
    }

    // mesh-halving diagnostic: draw noise at eps/2, block-sum it back to eps,
    // and compare the crossing verdicts of the two syntheses
    {
        int s = px_count(cfg.scales.front(), "scale");
        int li = 0;
        for (int i = 1; i < L; ++i)
            if (std::abs(cfg.levels[i]) < std::abs(cfg.levels[li])) li = i;
        double level = cfg.levels[li];
        long nd = std::min<long>(200, n);
        Rect extent{0.0, 2.0 * s * eps, 0.0, 1.0 * s * eps};
        long mf = static_cast<long>(std::ceil(pad / eps - 1e-9));
        if (mf < 1) mf = 1;
        double pad_len = static_cast<double>(mf) * eps;
        GridSpec gfine(eps / 2, extent, pad_len);
        GridSpec gcoarse(eps, extent, pad_len);
        std::vector<uint8_t> flip(static_cast<std::size_t>(nd), 0);
        parallel_for(nd, [&](long t) {
            WhiteNoise fine = sample_noise(gfine, seed(t, 0xD1A6u));
            WhiteNoise coarse = coarsen_noise(fine);
            FieldSample ff = synthesize(req, fine, gfine);
            FieldSample fc = synthesize(req, coarse, gcoarse);
            CrossingQuery q{extent, CrossDirection::LeftRight, Side::Primal, level};
            flip[static_cast<std::size_t>(t)] = crossing(ff, q) != crossing(fc, q) ? 1 : 0;
        });
        long k = 0;
        for (long t = 0; t < nd; ++t) k += flip[static_cast<std::size_t>(t)];
        Binomial b = binomial_estimate(k, nd);
        rep.rows.push_back({"resolution_diag", fmt_g(cfg.scales.front()), fmt_g(level),
                            fmt_i(nd), fmt_i(b.k), fmt_g(b.p_hat), fmt_g(b.se)});
        rep.gates.push_back(gate("resolution_flip_rate", b.p_hat, 1.0, b.p_hat <= 1.0,
                                 "diagnostic only: verdict flips under mesh halving"));
    }
}

// ----------------------------------------------------------------- self_duality

void run_self_duality(const ExperimentConfig& cfg, TrialSeeds seed, Report& rep) {
    if (cfg.scales.empty()) bad_config("self_duality needs at least one scale");
    require_ascending(cfg.scales, "scales");
    std::vector<double> levels = cfg.levels.empty() ? std::vector<double>{0.0} : cfg.levels;

    const double eps = cfg.eps;
    const auto trunc = config_truncation(cfg);
    const long n = cfg.n_trials;
    const int L = static_cast<int>(levels.size());
    const double pad = support_radius(cfg.kernel, trunc);
    SynthesisRequest req{cfg.kernel, trunc, MultiIndex{}, ConvEngine::Fft, TapMode::Midpoint};

    rep.csv_header = {"scale_px", "level", "n", "mean", "se"};
    double worst = 0.0;
    for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        int s = px_count(cfg.scales[si], "scale");
        Rect extent{0.0, 1.0 * s * eps, 0.0, 1.0 * s * eps};
        GridSpec grid(eps, extent, pad);
        std::vector<uint8_t> vals(static_cast<std::size_t>(n) * L, 0);
        parallel_for(n, [&](long t) {
            WhiteNoise noise = sample_noise(grid, seed(t, si));
            FieldSample f = synthesize(req, noise, grid);
            for (int li = 0; li < L; ++li) {
                CrossingQuery qp{extent, CrossDirection::LeftRight, Side::Primal, levels[li]};
                CrossingQuery qd{extent, CrossDirection::LeftRight, Side::Dual, levels[li]};
                uint8_t v = (crossing(f, qp) ? 1 : 0) + (crossing(f, qd) ? 1 : 0);
                vals[static_cast<std::size_t>(t) * L + li] = v;
            }
        });
        for (int li = 0; li < L; ++li) {
            double sum = 0, sum2 = 0;
            for (long t = 0; t < n; ++t) {
                double v = 0.5 * vals[static_cast<std::size_t>(t) * L + li];
                sum += v;
                sum2 += v * v;
            }
            double mean_v = sum / n;
            double var_v = n > 1 ? std::max(0.0, (sum2 - sum * sum / n) / (n - 1)) : 0.0;
            double se = std::sqrt(var_v / n);
            rep.rows.push_back({fmt_g(cfg.scales[si]), fmt_g(levels[li]), fmt_i(n),
                                fmt_g(mean_v), fmt_g(se)});
            worst = std::max(worst, std::abs(mean_v - 0.5));
        }
    }
    rep.gates.push_back(gate("self_dual_dev", worst, 0.02, worst <= 0.02,
                             "max |mean - 1/2| of (primal LR + dual LR)/2 on squares"));
}

// -------------------------------------------------------------------- arm_decay

void run_arm_decay(const ExperimentConfig& cfg, TrialSeeds seed, Report& rep) {
    if (cfg.scales.size() < 2) bad_config("arm_decay needs at least two radius ratios");
    require_ascending(cfg.scales, "scales");
    for (double r : cfg.scales)
        if (!(r > 1.0)) bad_config("arm_decay ratios must exceed 1");
    if (!(cfg.rho1_px > 0)) bad_config("rho1_px must be positive");

    const double eps = cfg.eps;
    const auto trunc = config_truncation(cfg);
    const long n = cfg.n_trials;
    const int K = static_cast<int>(cfg.scales.size());
    const double level = cfg.levels.empty() ? 0.0 : cfg.levels.front();
    const double rho1 = cfg.rho1_px * eps;
    const double rho2max = cfg.scales.back() * rho1;
    const double half = eps * std::ceil((rho2max + 2.0 * eps) / eps - 1e-9);
    const double pad = support_radius(cfg.kernel, trunc);
    Rect extent{-half, half, -half, half};
    GridSpec grid(eps, extent, pad);
    SynthesisRequest req{cfg.kernel, trunc, MultiIndex{}, ConvEngine::Fft, TapMode::Midpoint};

    std::vector<uint8_t> bits(static_cast<std::size_t>(n) * K, 0);
    parallel_for(n, [&](long t) {
        WhiteNoise noise = sample_noise(grid, seed(t, 0));
        FieldSample f = synthesize(req, noise, grid);
        for (int k = 0; k < K; ++k) {
            ArmQuery q{0.0, 0.0, rho1, cfg.scales[k] * rho1, Side::Primal, level};
            bits[static_cast<std::size_t>(t) * K + k] = arm_event(f, q) ? 1 : 0;
        }
    });

    std::vector<long> counts(K, 0);
    for (long t = 0; t < n; ++t)
        for (int k = 0; k < K; ++k) counts[k] += bits[static_cast<std::size_t>(t) * K + k];

    rep.csv_header = {"ratio", "rho1", "rho2", "n", "count", "p_hat", "se"};
    for (int k = 0; k < K; ++k) {
        Binomial b = binomial_estimate(counts[k], n);
        rep.rows.push_back({fmt_g(cfg.scales[k]), fmt_g(rho1), fmt_g(cfg.scales[k] * rho1),
                            fmt_i(n), fmt_i(b.k), fmt_g(b.p_hat), fmt_g(b.se)});
    }

    auto slope_of = [&](const std::vector<long>& c, long nn) -> double {
        std::vector<double> x, y;
        for (int k = 0; k < K; ++k)
            if (c[k] > 0) {
                x.push_back(std::log(cfg.scales[k]));
                y.push_back(std::log(static_cast<double>(c[k]) / nn));
            }
        if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
        return fit_ols(x, y).slope;
    };

    double slope = slope_of(counts, n);
    if (std::isnan(slope)) {
        rep.gates.push_back(gate("arm_exponent", 0.0, 0.0, false,
                                 "fewer than two ratios with any arm events"));
        return;
    }
    double d = -slope;
    double se_jk = jackknife_se(static_cast<std::size_t>(n), [&](std::size_t t) {
        std::vector<long> c = counts;
        for (int k = 0; k < K; ++k) c[k] -= bits[t * K + k];
        double s = slope_of(c, n - 1);
        return std::isnan(s) ? slope : s;
    });
    rep.fits.emplace_back("arm_d", d);
    rep.fits.emplace_back("arm_d_se", se_jk);
    rep.gates.push_back(gate("arm_exponent", d, 0.0, d > 0.0,
                             "decay exponent -slope of log p vs log ratio"));
    double ci_lo = d - 1.96 * se_jk;
    rep.gates.push_back(gate("arm_exponent_ci", ci_lo, 0.0, ci_lo > 0.0,
                             "jackknife 95% lower confidence bound on the exponent"));
}

// ---------------------------------------------------------- quasi_independence

void run_quasi_independence(const ExperimentConfig& cfg, TrialSeeds seed, Report& rep) {
    if (cfg.scales.empty()) bad_config("quasi_independence needs a rectangle scale");
    if (cfg.truncation_radii.empty())
        bad_config("quasi_independence needs a truncation radius");
    const int R = px_count(cfg.scales.front(), "scale");
    const double eps = cfg.eps;
    const double r = cfg.truncation_radii.front();
    if (!(r <= R * eps + 1e-9))
        bad_config("truncation radius must not exceed the smallest separation");
    const double level = cfg.levels.empty() ? 0.0 : cfg.levels.front();
    const long n = cfg.n_trials;
    const int seps[3] = {R, 2 * R, 4 * R};

    Rect extent{0.0, 6.0 * R * eps, 0.0, 1.0 * R * eps};
    const double pad = std::max(support_radius(cfg.kernel, std::nullopt), r / 2);
    GridSpec grid(eps, extent, pad);
    SynthesisRequest req_u{cfg.kernel, std::nullopt, MultiIndex{}, ConvEngine::Fft,
                           TapMode::Midpoint};
    SynthesisRequest req_t{cfg.kernel, CutoffSpec{r, 0.25}, MultiIndex{}, ConvEngine::Fft,
                           TapMode::Midpoint};

    Rect rect_a{0.0, R * eps, 0.0, R * eps};
    Rect rect_b[3];
    for (int k = 0; k < 3; ++k)
        rect_b[k] = Rect{(R + seps[k]) * eps, (2 * R + seps[k]) * eps, 0.0, R * eps};

    // bit layout per trial: [variant u/t] x [A, B0, B1, B2]
    std::vector<uint8_t> bits(static_cast<std::size_t>(n) * 8, 0);
    parallel_for(n, [&](long t) {
        WhiteNoise noise = sample_noise(grid, seed(t, 0));
        FieldSample fu = synthesize(req_u, noise, grid);
        FieldSample ft = synthesize(req_t, noise, grid);
        auto ev = [&](const FieldSample& f, const Rect& rc) {
            return crossing(f, CrossingQuery{rc, CrossDirection::LeftRight, Side::Primal, level});
        };
        std::size_t base = static_cast<std::size_t>(t) * 8;
        bits[base + 0] = ev(fu, rect_a);
        for (int k = 0; k < 3; ++k) bits[base + 1 + k] = ev(fu, rect_b[k]);
        bits[base + 4] = ev(ft, rect_a);
        for (int k = 0; k < 3; ++k) bits[base + 5 + k] = ev(ft, rect_b[k]);
    });

    rep.csv_header = {"variant", "sep_px", "n", "p_a", "p_b", "p_ab", "cov", "se_jack"};

    struct CovRow {
        double cov = 0, se = 0;
    };
    CovRow cov_u[3], cov_t[3];
    for (int variant = 0; variant < 2; ++variant) {
        const char* vname = variant == 0 ? "untruncated" : "truncated";
        std::size_t off = variant == 0 ? 0 : 4;
        long ka = 0;
        for (long t = 0; t < n; ++t) ka += bits[static_cast<std::size_t>(t) * 8 + off];
        if (variant == 0) {
            // separation 0 means B = A, where cov degenerates to p(1-p)
            double pa = static_cast<double>(ka) / n;
            double cv = pa * (1 - pa);
            double se = jackknife_se(static_cast<std::size_t>(n), [&](std::size_t t) {
                double p = (ka - bits[t * 8 + off]) / static_cast<double>(n - 1);
                return p * (1 - p);
            });
            rep.rows.push_back({vname, "0", fmt_i(n), fmt_g(pa), fmt_g(pa), fmt_g(pa),
                                fmt_g(cv), fmt_g(se)});
        }
        for (int k = 0; k < 3; ++k) {
            long kb = 0, kab = 0;
            for (long t = 0; t < n; ++t) {
                uint8_t a = bits[static_cast<std::size_t>(t) * 8 + off];
                uint8_t b = bits[static_cast<std::size_t>(t) * 8 + off + 1 + k];
                kb += b;
                kab += a & b;
            }
            double pa = static_cast<double>(ka) / n;
            double pb = static_cast<double>(kb) / n;
            double pab = static_cast<double>(kab) / n;
            double cv = pab - pa * pb;
            double se = jackknife_se(static_cast<std::size_t>(n), [&](std::size_t t) {
                uint8_t a = bits[t * 8 + off], b = bits[t * 8 + off + 1 + k];
                double m = n - 1;
                return (kab - (a & b)) / m - ((ka - a) / m) * ((kb - b) / m);
            });
            (variant == 0 ? cov_u : cov_t)[k] = {cv, se};
            rep.rows.push_back({vname, fmt_i(seps[k]), fmt_i(n), fmt_g(pa), fmt_g(pb),
                                fmt_g(pab), fmt_g(cv), fmt_g(se)});
        }
    }

    double worst_t = -1e300;
    for (int k = 0; k < 3; ++k)
        worst_t = std::max(worst_t, std::abs(cov_t[k].cov) - 3.0 * cov_t[k].se);
    rep.gates.push_back(gate("truncated_cov_zero", worst_t, 0.0, worst_t <= 0.0,
                             "max |cov| - 3 se for the truncated variant; support-disjoint "
                             "rectangles are exactly independent"));

    double far = std::abs(cov_u[2].cov) - (0.05 + 3.0 * cov_u[2].se);
    rep.gates.push_back(gate("far_cov_small", far, 0.0, far <= 0.0,
                             "|cov| at the largest separation against 0.05 + 3 se"));

    double worst_trend = -1e300;
    for (int k = 0; k + 1 < 3; ++k) {
        double slack = 3.0 * std::sqrt(cov_u[k].se * cov_u[k].se + cov_u[k + 1].se * cov_u[k + 1].se);
        worst_trend = std::max(worst_trend, cov_u[k + 1].cov - cov_u[k].cov - slack);
    }
    rep.gates.push_back(gate("cov_decreasing", worst_trend, 0.0, worst_trend <= 0.0,
                             "untruncated cov non-increasing in separation, 3 se slack"));
}

// ---------------------------------------------------------------- near_critical

void run_near_critical(const ExperimentConfig& cfg, TrialSeeds seed, Report& rep) {
    if (cfg.scales.empty()) bad_config("near_critical needs scales");
    require_ascending(cfg.scales, "scales");
    if (cfg.scales_fine.size() < 5)
        bad_config("near_critical needs at least five fine scales for the trend test");
    require_ascending(cfg.scales_fine, "scales_fine");
    if (!(cfg.exponents.c1 > 1.0)) bad_config("exponents.c1 must exceed 1");
    if (!(cfg.exponents.c2 >= 0.0)) bad_config("exponents.c2 must be nonnegative");

    const double eps = cfg.eps;
    const auto trunc = config_truncation(cfg);
    const long n = cfg.n_trials;
    const double pad = support_radius(cfg.kernel, trunc);
    SynthesisRequest req{cfg.kernel, trunc, MultiIndex{}, ConvEngine::Fft, TapMode::Midpoint};

    struct Curve {
        const char* name;
        const std::vector<double>* scales;
        std::function<double(double)> level_of;  // of physical scale s*eps
    };
    double c1 = cfg.exponents.c1, c2 = cfg.exponents.c2;
    Curve curves[3] = {
        {"steep", &cfg.scales, [c1](double s) { return std::pow(s, -c1); }},
        {"slow", &cfg.scales_fine,
         [c2](double s) { return c2 > 0 ? std::pow(s, -c2) : 0.1; }},
        {"critical", &cfg.scales, [](double) { return 0.0; }},
    };

    rep.csv_header = {"curve", "scale_px", "level", "n", "count", "p_hat", "se"};
    std::vector<double> p_steep, p_slow, p_crit, se_crit;
    for (int ci = 0; ci < 3; ++ci) {
        const Curve& cv = curves[ci];
        // the level-zero curve runs on squares with the convention-averaged
        // estimator: only there does self-duality pin the mean at exactly 1/2
        // for every scale, so flatness is a property and not a finite-size
        // accident.  Rectangles keep a real scale drift at level zero.
        const bool dual_pair = ci == 2;
        for (std::size_t si = 0; si < cv.scales->size(); ++si) {
            int s = px_count((*cv.scales)[si], "scale");
            double level = cv.level_of(s * eps);
            Rect extent = dual_pair ? Rect{0.0, 1.0 * s * eps, 0.0, 1.0 * s * eps}
                                    : Rect{0.0, 2.0 * s * eps, 0.0, 1.0 * s * eps};
            GridSpec grid(eps, extent, pad);
            std::vector<uint8_t> bits(static_cast<std::size_t>(n), 0);
            uint64_t tag = (static_cast<uint64_t>(ci + 1) << 8) | si;
            parallel_for(n, [&](long t) {
                WhiteNoise noise = sample_noise(grid, seed(t, tag));
                FieldSample f = synthesize(req, noise, grid);
                if (dual_pair) {
                    CrossingQuery qp{extent, CrossDirection::LeftRight, Side::Primal, level};
                    CrossingQuery qd{extent, CrossDirection::LeftRight, Side::Dual, level};
                    bits[static_cast<std::size_t>(t)] =
                        (crossing(f, qp) ? 1 : 0) + (crossing(f, qd) ? 1 : 0);
                } else {
                    CrossingQuery q{extent, CrossDirection::LeftRight, Side::Primal, level};
                    bits[static_cast<std::size_t>(t)] = crossing(f, q) ? 1 : 0;
                }
            });
            if (dual_pair) {
                long k2 = 0;
                double sum = 0, sum2 = 0;
                for (long t = 0; t < n; ++t) {
                    double v = 0.5 * bits[static_cast<std::size_t>(t)];
                    sum += v;
                    sum2 += v * v;
                    k2 += bits[static_cast<std::size_t>(t)];
                }
                double mean_v = sum / n;
                double var_v = n > 1 ? std::max(0.0, (sum2 - sum * sum / n) / (n - 1)) : 0.0;
                double se = std::sqrt(var_v / n);
                rep.rows.push_back({cv.name, fmt_g((*cv.scales)[si]), fmt_g(level), fmt_i(n),
                                    fmt_i(k2), fmt_g(mean_v), fmt_g(se)});
                p_crit.push_back(mean_v);
                se_crit.push_back(se);
            } else {
                long k = 0;
                for (long t = 0; t < n; ++t) k += bits[static_cast<std::size_t>(t)];
                Binomial b = binomial_estimate(k, n);
                rep.rows.push_back({cv.name, fmt_g((*cv.scales)[si]), fmt_g(level), fmt_i(n),
                                    fmt_i(b.k), fmt_g(b.p_hat), fmt_g(b.se)});
                if (ci == 0) p_steep.push_back(b.p_hat);
                if (ci == 1) p_slow.push_back(b.p_hat);
            }
        }
    }

    double max_steep = *std::max_element(p_steep.begin(), p_steep.end());
    rep.gates.push_back(gate("steep_bounded", max_steep, 0.9, max_steep <= 0.9,
                             "crossing stays bounded away from 1 when levels fall fast"));

    MannKendall mk = mann_kendall(p_slow);
    rep.gates.push_back(gate("slow_increasing", mk.p_increasing, 0.05,
                             mk.p_increasing <= 0.05,
                             "one-sided Mann-Kendall p for an increasing trend"));

    double worst_flat = -1e300;
    for (std::size_t i = 0; i < p_crit.size(); ++i)
        for (std::size_t j = i + 1; j < p_crit.size(); ++j) {
            double slack = 3.0 * std::sqrt(se_crit[i] * se_crit[i] + se_crit[j] * se_crit[j]);
            worst_flat = std::max(worst_flat, std::abs(p_crit[i] - p_crit[j]) - slack);
        }
    rep.gates.push_back(gate("critical_flat", worst_flat, 0.0, worst_flat <= 0.0,
                             "pairwise |p_i - p_j| - 3 se at level 0, squares, "
                             "convention-averaged"));
}

// ------------------------------------------------------------------- sprinkling

void run_sprinkling(const ExperimentConfig& cfg, TrialSeeds seed, Report& rep) {
    if (cfg.scales.size() < 2) bad_config("sprinkling needs at least two scales");
    require_ascending(cfg.scales, "scales");
    for (double R : cfg.scales)
        if (!(R >= 4.0)) bad_config("sprinkling scales must be at least 4");
    const double theta = cfg.exponents.theta, h = cfg.exponents.h, gamma = cfg.exponents.gamma;
    if (!(theta > 0) || !(h > 0) || !(gamma > 0))
        bad_config("sprinkling exponents must be positive");
    double theta_cap;
    switch (cfg.kernel.family) {
        case KernelFamily::RationalQuadratic:
            theta_cap = std::min(gamma, (cfg.kernel.beta - 1.0) * h);
            break;
        case KernelFamily::BargmannFock:
            theta_cap = gamma;
            break;
        default:
            bad_config("sprinkling needs an analytic kernel family");
    }
    if (theta > theta_cap + 1e-12)
        bad_config("sprinkling level exponent too aggressive for the kernel decay: theta = " +
                   fmt_g(theta) + " exceeds " + fmt_g(theta_cap));

    const long n = cfg.n_trials;
    rep.csv_header = {"scale", "eps", "trunc_radius", "level", "n", "count", "p_bad", "se"};
    std::vector<double> p(cfg.scales.size()), se(cfg.scales.size());
    for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        double R = cfg.scales[si];
        long m = std::llround(std::pow(R, 1.0 + gamma));
        double eps_R = R / static_cast<double>(m);
        double r_R = std::pow(R, h);
        double level = std::pow(R, -theta);
        CutoffSpec cut{r_R, 0.25};
        validate_cutoff(cut);
        if (!(r_R >= 2 * eps_R)) bad_config("sprinkling truncation below twice the mesh");
        Rect extent{0.0, 2.0 * R, 0.0, R};
        double pad = std::max(support_radius(cfg.kernel, std::nullopt), r_R / 2);
        GridSpec grid(eps_R, extent, pad);
        SynthesisRequest req_t{cfg.kernel, cut, MultiIndex{}, ConvEngine::Fft, TapMode::Midpoint};
        SynthesisRequest req_u{cfg.kernel, std::nullopt, MultiIndex{}, ConvEngine::Fft,
                               TapMode::Midpoint};
        std::vector<uint8_t> bits(static_cast<std::size_t>(n), 0);
        parallel_for(n, [&](long t) {
            WhiteNoise noise = sample_noise(grid, seed(t, si));
            FieldSample ft = synthesize(req_t, noise, grid);
            FieldSample fu = synthesize(req_u, noise, grid);
            bool dual_bt = crossing(ft, {extent, CrossDirection::BottomTop, Side::Dual, level});
            bool primal_2l =
                crossing(fu, {extent, CrossDirection::LeftRight, Side::Primal, 2 * level});
            bits[static_cast<std::size_t>(t)] = (!dual_bt && !primal_2l) ? 1 : 0;
        });
        long k = 0;
        for (long t = 0; t < n; ++t) k += bits[static_cast<std::size_t>(t)];
        Binomial b = binomial_estimate(k, n);
        p[si] = b.p_hat;
        se[si] = b.se;
        rep.rows.push_back({fmt_g(R), fmt_g(eps_R), fmt_g(r_R), fmt_g(level), fmt_i(n),
                            fmt_i(b.k), fmt_g(b.p_hat), fmt_g(b.se)});
    }

    double worst = -1e300;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        double slack = 3.0 * std::sqrt(se[i] * se[i] + se[i + 1] * se[i + 1]);
        worst = std::max(worst, p[i + 1] - p[i] - slack);
    }
    rep.gates.push_back(gate("bad_event_decreasing", worst, 0.0, worst <= 0.0,
                             "P[no dual crossing at l and no proxy crossing at 2l] "
                             "non-increasing in scale, 3 se slack"));
}

// ----------------------------------------------------------------- sup_norm_tail

void run_sup_norm_tail(const ExperimentConfig& cfg, TrialSeeds seed, Report& rep) {
    if (cfg.scales.empty()) bad_config("sup_norm_tail needs ball radii");
    require_ascending(cfg.scales, "scales");
    for (double R1 : cfg.scales) {
        if (!(R1 >= 2.0)) bad_config("sup_norm_tail radii must be at least 2");
        detail::lattice_coord(R1, cfg.eps, "sup_norm_tail scale");
    }
    const double eps = cfg.eps;
    const auto trunc = config_truncation(cfg);
    const long n = cfg.n_trials;
    const double pad = support_radius(cfg.kernel, trunc);
    SynthesisRequest req{cfg.kernel, trunc, MultiIndex{}, ConvEngine::Fft, TapMode::Midpoint};

    // scale m: field and gradient standard deviations at a point
    double quad = 0.02;
    double kap0 = covariance_at(cfg.kernel, 0.0, 0.0, quad);
    double g1 = derivative_variance(cfg.kernel, MultiIndex{1, 0}, quad);
    double g2 = derivative_variance(cfg.kernel, MultiIndex{0, 1}, quad);
    double m = std::sqrt(std::max(kap0, std::max(g1, g2)));
    rep.fits.emplace_back("m_scale", m);

    rep.csv_header = {"r1", "r2", "threshold", "n", "count", "p_hat", "se"};

    double far_p = -1.0;
    long far_k = -1;
    double concave_val = 0.0;
    bool concave_ok = false;
    std::string concave_note;
    std::vector<double> fit_x, fit_y;

    for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        double R1 = cfg.scales[si];
        double lg = std::log(R1);
        std::vector<double> r2s = {lg, 2 * lg, 3 * lg};
        if (si + 1 == cfg.scales.size()) r2s.push_back(6.0);
        std::sort(r2s.begin(), r2s.end());
        Rect extent{-R1, R1, -R1, R1};
        GridSpec grid(eps, extent, pad);
        std::vector<double> sups(static_cast<std::size_t>(n), 0.0);
        parallel_for(n, [&](long t) {
            WhiteNoise noise = sample_noise(grid, seed(t, si));
            FieldSample f = synthesize(req, noise, grid);
            sups[static_cast<std::size_t>(t)] = sup_norm(f, 0.0, 0.0, R1);
        });
        std::vector<long> counts(r2s.size(), 0);
        for (long t = 0; t < n; ++t)
            for (std::size_t j = 0; j < r2s.size(); ++j)
                if (sups[static_cast<std::size_t>(t)] >= m * r2s[j]) ++counts[j];
        for (std::size_t j = 0; j < r2s.size(); ++j) {
            Binomial b = binomial_estimate(counts[j], n);
            rep.rows.push_back({fmt_g(R1), fmt_g(r2s[j]), fmt_g(m * r2s[j]), fmt_i(n),
                                fmt_i(b.k), fmt_g(b.p_hat), fmt_g(b.se)});
            if (si + 1 == cfg.scales.size() && std::abs(r2s[j] - 6.0) <= 1e-12) {
                far_p = b.p_hat;
                far_k = b.k;
            }
        }

        if (si == 0) {
            // concavity of log p in R2^2 on the small ball, where all three
            // multiples of log R1 are measurable
            std::vector<double> th = {lg, 2 * lg, 3 * lg};
            long c[3];
            for (int j = 0; j < 3; ++j) {
                c[j] = 0;
                for (long t = 0; t < n; ++t)
                    if (sups[static_cast<std::size_t>(t)] >= m * th[j]) ++c[j];
            }
            if (c[2] == 0 || c[1] == 0 || c[0] == 0) {
                concave_note = "tail point with zero exceedances; not measurable";
            } else {
                for (int j = 0; j < 3; ++j) {
                    fit_x.push_back(th[j] * th[j]);
                    fit_y.push_back(std::log(static_cast<double>(c[j]) / n));
                }
                auto gap = [&](long c0, long c1c, long c2c, double nn) {
                    double y0 = std::log(c0 / nn), y1 = std::log(c1c / nn),
                           y2 = std::log(c2c / nn);
                    double x0 = th[0] * th[0], x1 = th[1] * th[1], x2 = th[2] * th[2];
                    return (y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0);
                };
                double g = gap(c[0], c[1], c[2], n);
                double se_g = jackknife_se(static_cast<std::size_t>(n), [&](std::size_t t) {
                    long d0 = c[0] - (sups[t] >= m * th[0] ? 1 : 0);
                    long d1 = c[1] - (sups[t] >= m * th[1] ? 1 : 0);
                    long d2 = c[2] - (sups[t] >= m * th[2] ? 1 : 0);
                    if (d0 == 0 || d1 == 0 || d2 == 0) return g;
                    return gap(d0, d1, d2, static_cast<double>(n - 1));
                });
                concave_val = g - 3.0 * se_g;
                concave_ok = concave_val <= 0.0;
                concave_note = "slope gap of log p in r2^2 minus 3 jackknife se";
            }
        }
    }

    rep.gates.push_back(gate("log_tail_concave", concave_val, 0.0, concave_ok,
                             concave_note.empty() ? "smallest ball" : concave_note));
    std::string far_note = "exceedances of 6 m at the largest ball";
    if (far_k == 0) far_note += "; zero observed, bound is one-sided";
    rep.gates.push_back(gate("far_tail_small", far_p, 1e-2, far_p >= 0 && far_p <= 1e-2,
                             far_note));
    if (fit_x.size() >= 2) {
        LinearFit lf = fit_ols(fit_x, fit_y);
        if (lf.slope < 0) rep.fits.emplace_back("tail_c_hat", -1.0 / lf.slope);
    }
}

// --------------------------------------------------------------- cameron_martin

void run_cameron_martin(const ExperimentConfig& cfg, TrialSeeds seed, Report& rep) {
    if (cfg.scales.empty()) bad_config("cameron_martin needs scales");
    require_ascending(cfg.scales, "scales");
    if (cfg.levels.empty() || cfg.levels.size() > 8)
        bad_config("cameron_martin needs between one and eight level shifts");
    require_ascending(cfg.levels, "levels");
    if (!(cfg.levels.front() > 0)) bad_config("cameron_martin level shifts must be positive");

    const double eps = cfg.eps;
    const auto trunc = config_truncation(cfg);
    const long n = cfg.n_trials;
    const int T = static_cast<int>(cfg.levels.size());
    const double pad = support_radius(cfg.kernel, trunc);
    SynthesisRequest req{cfg.kernel, trunc, MultiIndex{}, ConvEngine::Fft, TapMode::Midpoint};

    rep.csv_header = {"scale_px", "t", "n", "p_base", "flips", "dp", "dp_se", "c_hat"};

    std::vector<double> c_hats;
    double dp_small = -1, dp_double = -1;
    int pair_i = -1, pair_j = -1;
    for (int i = 0; i < T && pair_i < 0; ++i)
        for (int j = i + 1; j < T; ++j)
            if (std::abs(cfg.levels[j] - 2 * cfg.levels[i]) <= 1e-12) {
                pair_i = i;
                pair_j = j;
                break;
            }

    for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        int s = px_count(cfg.scales[si], "scale");
        Rect extent{0.0, 2.0 * s * eps, 0.0, 1.0 * s * eps};
        GridSpec grid(eps, extent, pad);
        // per trial: bit 0 = base crossing, bit 1+ti = crossing at level t
        std::vector<uint8_t> bits(static_cast<std::size_t>(n), 0);
        parallel_for(n, [&](long t) {
            WhiteNoise noise = sample_noise(grid, seed(t, si));
            FieldSample f = synthesize(req, noise, grid);
            uint8_t v = crossing(f, {extent, CrossDirection::LeftRight, Side::Primal, 0.0});
            for (int ti = 0; ti < T; ++ti)
                v |= static_cast<uint8_t>(
                    crossing(f, {extent, CrossDirection::LeftRight, Side::Primal, cfg.levels[ti]})
                    << (1 + ti));
            bits[static_cast<std::size_t>(t)] = v;
        });
        long kb = 0;
        std::vector<long> kflip(T, 0);
        for (long t = 0; t < n; ++t) {
            uint8_t v = bits[static_cast<std::size_t>(t)];
            bool base = v & 1;
            kb += base;
            for (int ti = 0; ti < T; ++ti)
                if (!base && (v >> (1 + ti)) & 1) ++kflip[ti];
        }
        double p_base = static_cast<double>(kb) / n;
        for (int ti = 0; ti < T; ++ti) {
            Binomial b = binomial_estimate(kflip[ti], n);
            double c_hat = 0.0;
            if (p_base > 0)
                c_hat = b.p_hat / (s * cfg.levels[ti] * std::sqrt(p_base));
            rep.rows.push_back({fmt_g(cfg.scales[si]), fmt_g(cfg.levels[ti]), fmt_i(n),
                                fmt_g(p_base), fmt_i(b.k), fmt_g(b.p_hat), fmt_g(b.se),
                                fmt_g(c_hat)});
            if (p_base > 0) c_hats.push_back(c_hat);
            if (si + 1 == cfg.scales.size()) {
                if (ti == pair_i) dp_small = b.p_hat;
                if (ti == pair_j) dp_double = b.p_hat;
            }
        }
    }

    if (c_hats.empty()) {
        rep.gates.push_back(gate("response_bounded", 0.0, 5.0, false,
                                 "no cell with a positive base probability"));
    } else {
        double med = median_of(c_hats);
        double mx = *std::max_element(c_hats.begin(), c_hats.end());
        double ratio = med > 0 ? mx / med : std::numeric_limits<double>::infinity();
        rep.gates.push_back(gate("response_bounded", ratio, 5.0, med > 0 && ratio <= 5.0,
                                 "max / median of dp / (scale t sqrt(p_base)) across cells"));
    }
    if (pair_i >= 0) {
        if (dp_small > 0) {
            double ratio = dp_double / dp_small;
            bool ok = ratio >= 1.5 && ratio <= 2.5;
            rep.gates.push_back(gate("doubling_linear", ratio, 2.5, ok,
                                     "dp(2t)/dp(t) at the largest scale, accepted in [1.5, 2.5]"));
        } else {
            rep.gates.push_back(gate("doubling_linear", 0.0, 2.5, false,
                                     "no flips at the smaller shift of the doubled pair"));
        }
    }
}

// ---------------------------------------------------------- bootstrap_recursion

void run_bootstrap_recursion(const ExperimentConfig& cfg, TrialSeeds, Report& rep) {
    const BootstrapParams& bp = cfg.bootstrap;
    if (bp.horizon < 8) bad_config("bootstrap horizon must be at least 8");
    if (!(bp.exp_r0 > 3.0)) bad_config("bootstrap exp_r0 must exceed 3");
    if (!(bp.poly_r1 > 3.0)) bad_config("bootstrap poly_r1 must exceed 3");
    if (!(bp.exp_a0 > 0) || !(bp.poly_a0 > 0) || !(bp.exp_c1 > 0) || !(bp.poly_c1 > 0) ||
        !(bp.exp_c2 > 0) || !(bp.poly_c2 > 0))
        bad_config("bootstrap constants must be positive");

    rep.csv_header = {"mode", "iter", "radius", "log_a"};

    // doubling scales with a slowly corrected factor; the quadratic term wins
    {
        double la = std::log(bp.exp_a0), R = bp.exp_r0;
        std::vector<double> xs, ys;
        rep.rows.push_back({"exp", "0", fmt_g(R), fmt_g(la)});
        for (int it = 0; it < bp.horizon; ++it) {
            la = log_sum_exp(std::log(bp.exp_c1) + 2 * la, -bp.exp_c2 * R);
            double lr = std::log(R);
            R = 2 * (R + R / (lr * lr));
            rep.rows.push_back({"exp", fmt_i(it + 1), fmt_g(R), fmt_g(la)});
            xs.push_back(R);
            ys.push_back(la);
        }
        LinearFit lf = fit_ols(xs, ys);
        double c3 = -lf.slope;
        bool cert = lf.slope + 1.96 * lf.slope_se < 0;
        rep.fits.emplace_back("exp_rate", c3);
        rep.gates.push_back(gate("exp_certificate", c3, 0.0, cert,
                                 cert ? "log a decays linearly in the scale"
                                      : "no certificate at this horizon"));
        double ratio = R / (bp.exp_r0 * std::pow(2.0, bp.horizon));
        rep.gates.push_back(gate("exp_growth_bounded", ratio, 20.0,
                                 ratio >= 1.0 && ratio <= 20.0,
                                 "final scale relative to plain doubling"));
    }

    // tripling scales with a polynomial cross term and a log-squared floor
    {
        double la = std::log(bp.poly_a0), lm = std::log(bp.poly_r1);
        std::vector<double> xs, ys;
        rep.rows.push_back({"poly", "0", fmt_g(std::exp(lm)), fmt_g(la)});
        for (int it = 0; it < bp.horizon; ++it) {
            double term = log_sum_exp(std::log(bp.poly_c1) + 2 * la, -bp.poly_c2 * lm + la);
            la = log_sum_exp(term, -bp.poly_c2 * lm * lm);
            lm += std::log(3.0);
            rep.rows.push_back({"poly", fmt_i(it + 1), fmt_g(std::exp(lm)), fmt_g(la)});
            xs.push_back(lm * lm);
            ys.push_back(la);
        }
        LinearFit lf = fit_ols(xs, ys);
        double c4 = -lf.slope;
        bool cert = lf.slope + 1.96 * lf.slope_se < 0;
        rep.fits.emplace_back("poly_rate", c4);
        rep.gates.push_back(gate("poly_certificate", c4, 0.0, cert,
                                 cert ? "log a decays linearly in log^2 scale"
                                      : "no certificate at this horizon"));
    }
}

} // namespace

// -------------------------------------------------------------------- plumbing

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "crossing_curve", "self_duality",  "arm_decay",
        "quasi_independence", "near_critical", "sprinkling",
        "sup_norm_tail", "cameron_martin", "bootstrap_recursion",
    };
    return names;
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.kernel = make_bargmann_fock();
    cfg.eps = 0.5;
    cfg.master_seed = 1;
    if (experiment == "crossing_curve") {
        cfg.scales = {32, 64, 128};
        cfg.levels = {-0.2, -0.1, 0.0, 0.1, 0.2};
        cfg.n_trials = 2000;
    } else if (experiment == "self_duality") {
        cfg.scales = {64};
        cfg.levels = {0.0};
        cfg.n_trials = 4000;
    } else if (experiment == "arm_decay") {
        cfg.scales = {2, 4, 8};
        cfg.levels = {0.0};
        cfg.rho1_px = 8;
        cfg.n_trials = 2000;
    } else if (experiment == "quasi_independence") {
        cfg.kernel = make_rational_quadratic(4.0);
        cfg.eps = 0.25;
        cfg.scales = {8};
        cfg.levels = {0.0};
        cfg.truncation_radii = {2.0};
        cfg.n_trials = 20000;
    } else if (experiment == "near_critical") {
        cfg.scales = {32, 64, 128};
        cfg.scales_fine = {16, 24, 32, 48, 64, 96, 128};
        cfg.levels = {};
        cfg.n_trials = 1200;
        cfg.exponents.c1 = 2.0;
        cfg.exponents.c2 = 0.0;
    } else if (experiment == "sprinkling") {
        cfg.kernel = make_rational_quadratic(4.0);
        cfg.scales = {16, 24, 32};
        cfg.n_trials = 300;
        cfg.exponents.theta = 0.3;
        cfg.exponents.h = 0.5;
        cfg.exponents.gamma = 0.5;
    } else if (experiment == "sup_norm_tail") {
        cfg.scales = {4, 16};
        cfg.n_trials = 30000;
    } else if (experiment == "cameron_martin") {
        cfg.scales = {16, 32, 64};
        cfg.levels = {0.01, 0.02, 0.05};
        cfg.n_trials = 100000;
    } else if (experiment == "bootstrap_recursion") {
        cfg.n_trials = 1;
    } else {
        std::string names;
        for (const auto& nm : experiment_names()) names += (names.empty() ? "" : ", ") + nm;
        throw std::invalid_argument("unknown experiment '" + experiment + "' (expected one of " +
                                    names + ")");
    }
    return cfg;
}

namespace {

double get_number(const ordered_json& j, const std::string& path) {
    if (!j.is_number()) bad_config("key '" + path + "' must be a number");
    return j.get<double>();
}

std::vector<double> get_number_array(const ordered_json& j, const std::string& path) {
    if (!j.is_array()) bad_config("key '" + path + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : j) {
        if (!e.is_number()) bad_config("key '" + path + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

void check_keys(const ordered_json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                ok = true;
                break;
            }
        if (!ok)
            bad_config("unknown key '" + (path.empty() ? item.key() : path + "." + item.key()) +
                       "'");
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        bad_config(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) bad_config("root must be an object");
    check_keys(j, "", {"schema_version", "experiment", "kernel", "eps", "scales", "scales_fine",
                       "levels", "truncation_radii", "rho1_px", "n_trials", "master_seed",
                       "exponents", "bootstrap"});
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<long>() != 1)
        bad_config("schema_version must be the integer 1");
    if (!j.contains("experiment") || !j["experiment"].is_string())
        bad_config("experiment must be a string");

    ExperimentConfig cfg = default_config(j["experiment"].get<std::string>());

    if (j.contains("kernel")) {
        const ordered_json& k = j["kernel"];
        if (!k.is_object()) bad_config("kernel must be an object");
        check_keys(k, "kernel", {"family", "beta", "amplitude", "table_path"});
        if (!k.contains("family") || !k["family"].is_string())
            bad_config("kernel.family must be a string");
        std::string family = k["family"].get<std::string>();
        double amplitude = k.contains("amplitude") ? get_number(k["amplitude"], "kernel.amplitude")
                                                   : 1.0;
        if (family == "rational_quadratic") {
            if (!k.contains("beta")) bad_config("kernel.beta is required for rational_quadratic");
            cfg.kernel = make_rational_quadratic(get_number(k["beta"], "kernel.beta"), amplitude);
        } else if (family == "bargmann_fock") {
            if (k.contains("beta")) bad_config("kernel.beta only applies to rational_quadratic");
            cfg.kernel = make_bargmann_fock(amplitude);
        } else if (family == "tabulated") {
            if (k.contains("beta")) bad_config("kernel.beta only applies to rational_quadratic");
            if (!k.contains("table_path") || !k["table_path"].is_string())
                bad_config("kernel.table_path is required for a tabulated kernel");
            cfg.table_path = k["table_path"].get<std::string>();
            cfg.kernel = make_tabulated(
                std::make_shared<const KernelTable>(read_qtab(cfg.table_path)), amplitude);
        } else {
            bad_config("kernel.family must be rational_quadratic, bargmann_fock or tabulated");
        }
    }
    if (j.contains("eps")) {
        cfg.eps = get_number(j["eps"], "eps");
        if (!(cfg.eps > 0)) bad_config("eps must be positive");
    }
    if (j.contains("scales")) cfg.scales = get_number_array(j["scales"], "scales");
    if (j.contains("scales_fine"))
        cfg.scales_fine = get_number_array(j["scales_fine"], "scales_fine");
    if (j.contains("levels")) cfg.levels = get_number_array(j["levels"], "levels");
    if (j.contains("truncation_radii")) {
        cfg.truncation_radii = get_number_array(j["truncation_radii"], "truncation_radii");
        for (double r : cfg.truncation_radii)
            if (!(r > 0)) bad_config("truncation_radii must be positive");
    }
    if (j.contains("rho1_px")) {
        cfg.rho1_px = get_number(j["rho1_px"], "rho1_px");
        if (!(cfg.rho1_px > 0)) bad_config("rho1_px must be positive");
    }
    if (j.contains("n_trials")) {
        if (!j["n_trials"].is_number_integer()) bad_config("n_trials must be an integer");
        long n = j["n_trials"].get<long>();
        if (n < 1 || n > 1000000000L) bad_config("n_trials out of range");
        cfg.n_trials = n;
    }
    if (j.contains("master_seed")) {
        if (!j["master_seed"].is_number_integer() ||
            (j["master_seed"].is_number_integer() && !j["master_seed"].is_number_unsigned() &&
             j["master_seed"].get<long long>() < 0))
            bad_config("master_seed must be a nonnegative integer");
        cfg.master_seed = j["master_seed"].get<uint64_t>();
    }
    if (j.contains("exponents")) {
        const ordered_json& e = j["exponents"];
        if (!e.is_object()) bad_config("exponents must be an object");
        check_keys(e, "exponents", {"theta", "h", "gamma", "c1", "c2"});
        if (e.contains("theta")) cfg.exponents.theta = get_number(e["theta"], "exponents.theta");
        if (e.contains("h")) cfg.exponents.h = get_number(e["h"], "exponents.h");
        if (e.contains("gamma")) cfg.exponents.gamma = get_number(e["gamma"], "exponents.gamma");
        if (e.contains("c1")) cfg.exponents.c1 = get_number(e["c1"], "exponents.c1");
        if (e.contains("c2")) cfg.exponents.c2 = get_number(e["c2"], "exponents.c2");
    }
    if (j.contains("bootstrap")) {
        const ordered_json& b = j["bootstrap"];
        if (!b.is_object()) bad_config("bootstrap must be an object");
        check_keys(b, "bootstrap", {"exp", "poly", "horizon"});
        if (b.contains("horizon")) {
            if (!b["horizon"].is_number_integer()) bad_config("bootstrap.horizon must be an integer");
            cfg.bootstrap.horizon = static_cast<int>(b["horizon"].get<long>());
        }
        if (b.contains("exp")) {
            const ordered_json& e = b["exp"];
            if (!e.is_object()) bad_config("bootstrap.exp must be an object");
            check_keys(e, "bootstrap.exp", {"c1", "c2", "a0", "r0"});
            if (e.contains("c1")) cfg.bootstrap.exp_c1 = get_number(e["c1"], "bootstrap.exp.c1");
            if (e.contains("c2")) cfg.bootstrap.exp_c2 = get_number(e["c2"], "bootstrap.exp.c2");
            if (e.contains("a0")) cfg.bootstrap.exp_a0 = get_number(e["a0"], "bootstrap.exp.a0");
            if (e.contains("r0")) cfg.bootstrap.exp_r0 = get_number(e["r0"], "bootstrap.exp.r0");
        }
        if (b.contains("poly")) {
            const ordered_json& p = b["poly"];
            if (!p.is_object()) bad_config("bootstrap.poly must be an object");
            check_keys(p, "bootstrap.poly", {"c1", "c2", "a0", "r1"});
            if (p.contains("c1")) cfg.bootstrap.poly_c1 = get_number(p["c1"], "bootstrap.poly.c1");
            if (p.contains("c2")) cfg.bootstrap.poly_c2 = get_number(p["c2"], "bootstrap.poly.c2");
            if (p.contains("a0")) cfg.bootstrap.poly_a0 = get_number(p["a0"], "bootstrap.poly.a0");
            if (p.contains("r1")) cfg.bootstrap.poly_r1 = get_number(p["r1"], "bootstrap.poly.r1");
        }
    }
    validate_kernel(cfg.kernel);
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["schema_version"] = 1;
    j["experiment"] = cfg.experiment;
    ordered_json k;
    switch (cfg.kernel.family) {
        case KernelFamily::RationalQuadratic:
            k["family"] = "rational_quadratic";
            k["beta"] = cfg.kernel.beta;
            break;
        case KernelFamily::BargmannFock:
            k["family"] = "bargmann_fock";
            break;
        case KernelFamily::Tabulated:
            k["family"] = "tabulated";
            k["table_path"] = cfg.table_path;
            break;
    }
    k["amplitude"] = cfg.kernel.amplitude;
    j["kernel"] = k;
    j["eps"] = cfg.eps;
    j["scales"] = cfg.scales;
    if (!cfg.scales_fine.empty()) j["scales_fine"] = cfg.scales_fine;
    j["levels"] = cfg.levels;
    j["truncation_radii"] = cfg.truncation_radii;
    j["rho1_px"] = cfg.rho1_px;
    j["n_trials"] = cfg.n_trials;
    j["master_seed"] = cfg.master_seed;
    j["exponents"] = {{"theta", cfg.exponents.theta},
                      {"h", cfg.exponents.h},
                      {"gamma", cfg.exponents.gamma},
                      {"c1", cfg.exponents.c1},
                      {"c2", cfg.exponents.c2}};
    j["bootstrap"] = {
        {"exp",
         {{"c1", cfg.bootstrap.exp_c1},
          {"c2", cfg.bootstrap.exp_c2},
          {"a0", cfg.bootstrap.exp_a0},
          {"r0", cfg.bootstrap.exp_r0}}},
        {"poly",
         {{"c1", cfg.bootstrap.poly_c1},
          {"c2", cfg.bootstrap.poly_c2},
          {"a0", cfg.bootstrap.poly_a0},
          {"r1", cfg.bootstrap.poly_r1}}},
        {"horizon", cfg.bootstrap.horizon},
    };
    return j.dump(2) + "\n";
}

bool Report::all_pass() const {
    for (const auto& g : gates)
        if (!g.pass) return false;
    return true;
}

std::string Report::csv() const {
    std::string out;
    for (std::size_t i = 0; i < csv_header.size(); ++i)
        out += (i ? "," : "") + csv_header[i];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + row[i];
        out += '\n';
    }
    return out;
}

std::string Report::summary_json() const {
    ordered_json j;
    j["experiment"] = experiment;
    ordered_json arr = ordered_json::array();
    for (const auto& g : gates) {
        ordered_json e;
        e["name"] = g.name;
        e["value"] = g.value;
        e["threshold"] = g.threshold;
        e["pass"] = g.pass;
        if (!g.note.empty()) e["note"] = g.note;
        arr.push_back(e);
    }
    j["gates"] = arr;
    if (!fits.empty()) {
        ordered_json f;
        for (const auto& [name, value] : fits) f[name] = value;
        j["fits"] = f;
    }
    j["runtime_s"] = runtime_s;
    return j.dump(2) + "\n";
}

Report run_experiment(const ExperimentConfig& cfg) {
    const auto& names = experiment_names();
    int exp_id = -1;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == cfg.experiment) exp_id = static_cast<int>(i) + 1;
    if (exp_id < 0) default_config(cfg.experiment);  // throws with the name list
    if (cfg.n_trials < 1) bad_config("n_trials must be at least 1");
    validate_kernel(cfg.kernel);

    Report rep;
    rep.experiment = cfg.experiment;
    TrialSeeds seed{experiment_master(cfg, exp_id)};
    auto t0 = std::chrono::steady_clock::now();
    switch (exp_id) {
        case 1: run_crossing_curve(cfg, seed, rep); break;
        case 2: run_self_duality(cfg, seed, rep); break;
        case 3: run_arm_decay(cfg, seed, rep); break;
        case 4: run_quasi_independence(cfg, seed, rep); break;
        case 5: run_near_critical(cfg, seed, rep); break;
        case 6: run_sprinkling(cfg, seed, rep); break;
        case 7: run_sup_norm_tail(cfg, seed, rep); break;
        case 8: run_cameron_martin(cfg, seed, rep); break;
        case 9: run_bootstrap_recursion(cfg, seed, rep); break;
    }
    auto t1 = std::chrono::steady_clock::now();
    rep.runtime_s = std::chrono::duration<double>(t1 - t0).count();
    return rep;
}

ReportFiles write_report(const Report& rep, const ExperimentConfig& cfg,
                         const std::string& config_path, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + out_dir);

    ReportFiles files;
    files.csv_path = out_dir + "/" + rep.experiment + ".csv";
    files.summary_path = out_dir + "/" + rep.experiment + "_summary.json";
    files.manifest_path = out_dir + "/manifest.json";

    std::string csv_text = rep.csv();
    std::string summary_text = rep.summary_json();
    write_text_file(files.csv_path, csv_text);
    write_text_file(files.summary_path, summary_text);

    char stamp[32];
    std::time_t now = std::time(nullptr);
    std::tm tmv{};
    gmtime_r(&now, &tmv);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tmv);

    ordered_json man;
    man["experiment"] = rep.experiment;
    man["config_path"] = config_path;
    man["output_dir"] = out_dir;
    man["outputs"] = {{"csv", files.csv_path}, {"summary", files.summary_path}};
    man["content_hash"] = fnv1a_hex(csv_text + summary_text);
    man["created_utc"] = stamp;
    man["config"] = ordered_json::parse(config_to_json(cfg));
    write_text_file(files.manifest_path, man.dump(2) + "\n");
    return files;
}

} // namespace gfp
