#include "gfp/influence.hpp"

#include "gfp/rng.hpp"
#include "gfp/stats.hpp"
#include "gfp/threads.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfp {

EnsembleSpec ensemble_from_grid(const GridSpec& grid, uint64_t master_seed, long n_trials) {
    EnsembleSpec s;
    s.ivx0 = grid.ivx0();
    s.ivy0 = grid.ivy0();
    s.nvx = grid.nvx();
    s.nvy = grid.nvy();
    s.eps = grid.eps();
    s.master_seed = master_seed;
    s.n_trials = n_trials;
    return s;
}

WhiteNoise ensemble_noise(const EnsembleSpec& s, long trial) {
    return sample_noise_window(s.ivx0, s.ivy0, s.nvx, s.nvy, s.eps,
                               derive_seed(s.master_seed, static_cast<uint64_t>(trial)));
}

double resample_value(const WhiteNoise& noise, int wi, int wj) {
    return normal_at(noise.seed, static_cast<int32_t>(noise.ivx0 + wi),
                     static_cast<int32_t>(noise.ivy0 + wj), 1);
}

namespace {

void check_spec(const EnsembleSpec& s) {
    if (s.nvx <= 0 || s.nvy <= 0 || !(s.eps > 0) || s.n_trials < 1)
        throw std::invalid_argument("influence: bad ensemble spec");
}

} // namespace

InfluenceEstimate influence_resampling(const NoiseEvent& event, const EnsembleSpec& spec) {
    check_spec(spec);
    const std::size_t nv = static_cast<std::size_t>(spec.nvx) * spec.nvy;
    const long n = spec.n_trials;

    struct Acc {
        std::vector<long> flips;
    };
    Acc total = reduce_blocks<Acc>(
        n, 32, [&] { return Acc{std::vector<long>(nv, 0)}; },
        [&](Acc& a, long t) {
            WhiteNoise noise = ensemble_noise(spec, t);
            const bool base = event(noise);
            for (int wj = 0; wj < spec.nvy; ++wj)
                for (int wi = 0; wi < spec.nvx; ++wi) {
                    std::size_t v = noise.window_index(wi, wj);
                    const double old = noise.values[v];
                    noise.values[v] = resample_value(noise, wi, wj);
                    if (event(noise) != base) ++a.flips[v];
                    noise.values[v] = old;
                }
        },
        [](Acc& a, Acc&& b) {
            for (std::size_t v = 0; v < a.flips.size(); ++v) a.flips[v] += b.flips[v];
        });

    InfluenceEstimate est;
    est.n = n;
    est.resampling.resize(nv);
    est.resampling_se.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        Binomial b = binomial_estimate(total.flips[v], n);
        est.resampling[v] = b.p_hat;
        est.resampling_se[v] = b.se;
    }
    return est;
}

InfluenceEstimate influence_russo(const NoiseEvent& event, const EnsembleSpec& spec) {
    check_spec(spec);
    const std::size_t nv = static_cast<std::size_t>(spec.nvx) * spec.nvy;
    const long n = spec.n_trials;

    struct Acc {
        std::vector<double> sum, sumsq;
    };
    Acc total = reduce_blocks<Acc>(
        n, 32, [&] { return Acc{std::vector<double>(nv, 0.0), std::vector<double>(nv, 0.0)}; },
        [&](Acc& a, long t) {
            WhiteNoise noise = ensemble_noise(spec, t);
            if (!event(noise)) return;
            for (std::size_t v = 0; v < nv; ++v) {
                const double s = noise.values[v];
                a.sum[v] += s;
                a.sumsq[v] += s * s;
            }
        },
        [](Acc& a, Acc&& b) {
            for (std::size_t v = 0; v < a.sum.size(); ++v) {
                a.sum[v] += b.sum[v];
                a.sumsq[v] += b.sumsq[v];
            }
        });

    InfluenceEstimate est;
    est.n = n;
    est.russo.resize(nv);
    est.russo_se.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const double m = total.sum[v] / static_cast<double>(n);
        double var = total.sumsq[v] / static_cast<double>(n) - m * m;
        if (n > 1) var *= static_cast<double>(n) / static_cast<double>(n - 1);
        est.russo[v] = m;
        est.russo_se[v] = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    }
    return est;
}

MillsConstant mills_constant() {
    // coarse scan over [0, 10], then golden-section refinement
    double best_a = 0.0, best = mills_ratio(0.0);
    for (int i = 1; i <= 1000; ++i) {
        double a = i * 0.01;
        double m = mills_ratio(a);
        if (m > best) {
            best = m;
            best_a = a;
        }
    }
    double lo = std::max(0.0, best_a - 0.02), hi = std::min(10.0, best_a + 0.02);
    const double gr = 0.6180339887498949;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = mills_ratio(x1), f2 = mills_ratio(x2);
    while (hi - lo > 1e-10) {
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = mills_ratio(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = mills_ratio(x2);
        }
    }
    MillsConstant mc;
    mc.argmax = 0.5 * (lo + hi);
    mc.value = mills_ratio(mc.argmax);
    return mc;
}

OsssAudit osss_audit(const NoiseEvent& event, const TraceRunner& algo, const EnsembleSpec& spec,
                     long n_algo_runs) {
    check_spec(spec);
    if (n_algo_runs < 2) throw std::invalid_argument("osss_audit: need at least 2 algorithm runs");
    const std::size_t nv = static_cast<std::size_t>(spec.nvx) * spec.nvy;

    EnsembleSpec algo_spec = spec;
    algo_spec.master_seed = derive_seed(spec.master_seed, 0xA160);
    algo_spec.n_trials = n_algo_runs;

    // pass 1: algorithm ensemble -> revealments
    std::vector<uint8_t> revealed(static_cast<std::size_t>(n_algo_runs) * nv);
    std::vector<uint8_t> outputs(static_cast<std::size_t>(n_algo_runs));
    parallel_for(n_algo_runs, [&](long u) {
        WhiteNoise noise = ensemble_noise(algo_spec, u);
        ExplorationTrace tr =
            algo(noise, derive_seed(algo_spec.master_seed, static_cast<uint64_t>(u), 1));
        if (tr.revealed.size() != nv)
            throw std::invalid_argument("osss_audit: trace window does not match the ensemble");
        std::copy(tr.revealed.begin(), tr.revealed.end(),
                  revealed.begin() + static_cast<std::ptrdiff_t>(u * static_cast<long>(nv)));
        outputs[static_cast<std::size_t>(u)] = static_cast<uint8_t>(tr.output);
    });

    // determination check on a subsample
    const long n_check = std::min<long>(n_algo_runs, 64);
    for (long u = 0; u < n_check; ++u) {
        WhiteNoise noise = ensemble_noise(algo_spec, u);
        if (event(noise) != (outputs[static_cast<std::size_t>(u)] == 1))
            throw std::runtime_error("osss_audit: algorithm does not determine the event");
    }

    std::vector<double> delta(nv, 0.0), delta_se(nv, 0.0);
    for (std::size_t v = 0; v < nv; ++v) {
        long c = 0;
        for (long u = 0; u < n_algo_runs; ++u)
            c += revealed[static_cast<std::size_t>(u) * nv + v];
        Binomial b = binomial_estimate(c, n_algo_runs);
        delta[v] = b.p_hat;
        delta_se[v] = b.se;
    }

    // pass 2: influence ensemble; S_t tracks the per-trial delta-weighted flip
    // sum so the vertex-correlated part of the RHS error is measured honestly
    const long n = spec.n_trials;
    std::vector<long> flips(nv, 0);
    std::vector<double> s_trial(static_cast<std::size_t>(n), 0.0);
    std::vector<uint8_t> base_bits(static_cast<std::size_t>(n), 0);
    {
        struct Acc {
            std::vector<long> flips;
        };
        Acc total = reduce_blocks<Acc>(
            n, 32, [&] { return Acc{std::vector<long>(nv, 0)}; },
            [&](Acc& a, long t) {
                WhiteNoise noise = ensemble_noise(spec, t);
                const bool base = event(noise);
                base_bits[static_cast<std::size_t>(t)] = base;
                double s = 0.0;
                for (int wj = 0; wj < spec.nvy; ++wj)
                    for (int wi = 0; wi < spec.nvx; ++wi) {
                        std::size_t v = noise.window_index(wi, wj);
                        const double old = noise.values[v];
                        noise.values[v] = resample_value(noise, wi, wj);
                        if (event(noise) != base) {
                            ++a.flips[v];
                            s += delta[v];
                        }
                        noise.values[v] = old;
                    }
                s_trial[static_cast<std::size_t>(t)] = s;
            },
            [](Acc& a, Acc&& b) {
                for (std::size_t v = 0; v < a.flips.size(); ++v) a.flips[v] += b.flips[v];
            });
        flips = std::move(total.flips);
    }

    std::vector<double> infl(nv);
    for (std::size_t v = 0; v < nv; ++v) infl[v] = static_cast<double>(flips[v]) / n;

    OsssAudit out;
    out.n_algo = n_algo_runs;
    out.n_influence = n;
    long k_true = 0;
    for (uint8_t b : base_bits) k_true += b;
    Binomial pb = binomial_estimate(k_true, n);
    out.p_hat = pb.p_hat;
    out.var_hat = pb.p_hat * (1.0 - pb.p_hat);
    out.var_se = std::abs(1.0 - 2.0 * pb.p_hat) * pb.se + pb.se * pb.se;

    out.rhs = mean(s_trial);
    const double se_inf_part = std::sqrt(sample_variance(s_trial) / static_cast<double>(n));
    // revealment uncertainty: per-run influence-weighted reveal totals
    std::vector<double> t_run(static_cast<std::size_t>(n_algo_runs), 0.0);
    for (long u = 0; u < n_algo_runs; ++u) {
        double s = 0.0;
        const uint8_t* row = revealed.data() + static_cast<std::size_t>(u) * nv;
        for (std::size_t v = 0; v < nv; ++v)
            if (row[v]) s += infl[v];
        t_run[static_cast<std::size_t>(u)] = s;
    }
    const double se_delta_part =
        std::sqrt(sample_variance(t_run) / static_cast<double>(n_algo_runs));
    out.rhs_se = std::sqrt(se_inf_part * se_inf_part + se_delta_part * se_delta_part);

    out.margin = out.rhs - out.var_hat;
    out.margin_se = std::sqrt(out.var_se * out.var_se + out.rhs_se * out.rhs_se);
    return out;
}

RussoCheck russo_derivative_check(const SynthesisRequest& req, const GridSpec& grid,
                                  const LevelEvent& event, double level, double h,
                                  uint64_t master_seed, long n_trials) {
    if (!(h > 0)) throw std::invalid_argument("russo_derivative_check: need h > 0");
    if (n_trials < 2) throw std::invalid_argument("russo_derivative_check: need n_trials >= 2");
    validate_kernel(req.kernel);
    if (req.kernel.family == KernelFamily::Tabulated) {
        double qmax = 0.0, qmin = 0.0;
        for (double v : req.kernel.table->values) {
            qmax = std::max(qmax, v);
            qmin = std::min(qmin, v);
        }
        if (qmin < -1e-12 * std::max(qmax, 1e-300))
            throw std::invalid_argument(
                "russo_derivative_check: kernel takes negative values; the identity needs q >= 0");
    }
    const double l1 =
        req.truncation ? l1_norm_truncated(req.kernel, *req.truncation) : l1_norm(req.kernel);
    const double scale = grid.eps() / l1;

    const long n = n_trials;
    std::vector<double> d(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n));
    std::vector<uint8_t> base_bits(static_cast<std::size_t>(n));
    parallel_for(n, [&](long t) {
        WhiteNoise noise = sample_noise(grid, derive_seed(master_seed, static_cast<uint64_t>(t)));
        FieldSample f = synthesize(req, noise, grid);
        const bool up = event(f, level + h), dn = event(f, level - h), base = event(f, level);
        d[static_cast<std::size_t>(t)] = (static_cast<double>(up) - static_cast<double>(dn)) / (2.0 * h);
        base_bits[static_cast<std::size_t>(t)] = base;
        double s = 0.0;
        if (base)
            for (double v : noise.values) s += v;
        x[static_cast<std::size_t>(t)] = scale * s;
    });

    RussoCheck rc;
    rc.lhs = mean(d);
    rc.lhs_se = std::sqrt(sample_variance(d) / static_cast<double>(n));
    rc.rhs = mean(x);
    rc.rhs_se = std::sqrt(sample_variance(x) / static_cast<double>(n));
    long k = 0;
    for (uint8_t b : base_bits) k += b;
    rc.p_at_level = static_cast<double>(k) / static_cast<double>(n);
    rc.rel_gap = std::abs(rc.lhs - rc.rhs) / std::max(std::abs(rc.rhs), 1e-300);
    return rc;
}

} // namespace gfp
