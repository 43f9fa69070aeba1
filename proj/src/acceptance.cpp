#include "gfp/acceptance.hpp"

#include "gfp/experiments.hpp"
#include "gfp/explorer.hpp"
#include "gfp/field.hpp"
#include "gfp/influence.hpp"
#include "gfp/io.hpp"
#include "gfp/kernel.hpp"
#include "gfp/noise.hpp"
#include "gfp/rng.hpp"
#include "gfp/stats.hpp"
#include "gfp/threads.hpp"
#include "gfp/topology.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <vector>

namespace gfp {

namespace {

std::string strf(const char* fmt, ...) {
    char buf[768];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

uint64_t crit_seed(int id, uint64_t sub = 0) {
    return derive_seed(0x61636365707463ULL, static_cast<uint64_t>(id), sub);
}

std::string gates_detail(const Report& rep) {
    std::string d;
    for (const auto& g : rep.gates) {
        if (!d.empty()) d += "; ";
        d += strf("%s=%.4g (thr %.4g)%s", g.name.c_str(), g.value, g.threshold,
                  g.pass ? "" : " FAIL");
    }
    return d;
}

// ------------------------------------------------------------- 1: covariance

void crit_covariance(CriterionResult& r) {
    struct Probe {
        int dx, dy;
    };
    std::vector<Probe> probes;
    for (int d : {1, 2, 3, 4, 6, 8, 12, 16}) probes.push_back({d, 0});
    for (int d : {1, 2, 3, 4, 6, 8}) {
        probes.push_back({d, d});
        probes.push_back({d, -d});
    }
    const int P = static_cast<int>(probes.size());
    const double eps = 0.25;
    const long n = 2000;
    Rect extent{0, 64, 0, 64};

    struct KernelCase {
        const char* name;
        KernelSpec k;
    };
    KernelCase cases[2] = {{"smooth", make_bargmann_fock()},
                           {"poly", make_rational_quadratic(4.0)}};
    std::string detail;
    bool ok = true;
    for (int kc = 0; kc < 2; ++kc) {
        const KernelSpec& kern = cases[kc].k;
        GridSpec grid(eps, extent, support_radius(kern, std::nullopt));
        SynthesisRequest req{kern, std::nullopt, MultiIndex{}, ConvEngine::Fft,
                             TapMode::Midpoint};
        // per seed, average the product over a lattice of base points spaced
        // far beyond the correlation length; stationarity keeps the estimator
        // unbiased while the spatial average cuts its variance ~50x
        std::vector<double> prod(static_cast<std::size_t>(n) * P);
        parallel_for(n, [&](long t) {
            WhiteNoise noise = sample_noise(grid, derive_seed(crit_seed(1), t, kc));
            FieldSample f = synthesize(req, noise, grid);
            for (int p = 0; p < P; ++p) {
                double acc = 0.0;
                for (int jb = 16; jb <= 208; jb += 32)
                    for (int ib = 16; ib <= 208; ib += 32)
                        acc += f.at(ib, jb) * f.at(ib + probes[p].dx, jb + probes[p].dy);
                prod[static_cast<std::size_t>(t) * P + p] = acc / 49.0;
            }
        });
        double worst = 0.0;
        for (int p = 0; p < P; ++p) {
            std::vector<double> col(n);
            for (long t = 0; t < n; ++t) col[t] = prod[static_cast<std::size_t>(t) * P + p];
            double mu = mean(col);
            double se = std::sqrt(sample_variance(col) / n);
            double x = probes[p].dx * eps, y = probes[p].dy * eps;
            double truth = kern.family == KernelFamily::BargmannFock
                               ? std::exp(-(x * x + y * y) / 2)
                               : covariance_at(kern, x, y, 0.05);
            worst = std::max(worst, std::abs(mu - truth) / se);
        }
        ok = ok && worst <= 3.0;
        detail += strf("%s%s worst |dev|/se = %.2f", detail.empty() ? "" : "; ",
                       cases[kc].name, worst);
    }
    r.pass = ok;
    r.detail = detail + strf(" over %d offsets, n=%ld, 49 base points, gate 3 se", P, n);
}

// ------------------------------------------------ 2: pointwise variance laws

void crit_variance(CriterionResult& r) {
    KernelSpec k = make_bargmann_fock();

    // (a) single-pixel variance against the lattice tap sum
    double z_a, se_a, sig2;
    {
        const double eps = 0.25;
        const long n = 20000;
        GridSpec grid(eps, Rect{0, eps, 0, eps}, support_radius(k, std::nullopt));
        SynthesisRequest req{k, std::nullopt, MultiIndex{}, ConvEngine::Direct,
                             TapMode::Midpoint};
        int K = tap_halfwidth(req, eps);
        sig2 = 0.0;
        for (int b = -K; b <= K; ++b)
            for (int a = -K; a <= K; ++a) {
                double q = eval_q(k, a * eps, b * eps);
                sig2 += q * q;
            }
        sig2 *= eps * eps;
        std::vector<double> f2(n);
        parallel_for(n, [&](long t) {
            WhiteNoise noise = sample_noise(grid, derive_seed(crit_seed(2), t, 0));
            FieldSample f = synthesize(req, noise, grid);
            f2[t] = f.at(0, 0) * f.at(0, 0);
        });
        double mu = mean(f2);
        se_a = std::sqrt(sample_variance(f2) / n);
        z_a = std::abs(mu - sig2) / se_a;
    }

    // (b) truncation error variance against the cutoff-difference tap sum and
    // the continuum integral
    double z_b, tev_cont, tev_disc, gap_rel;
    {
        const double eps = 0.1;
        const long n = 20000;
        CutoffSpec r1{4.0, 0.25};
        CutoffSpec r2{numerical_infinity_radius(k), 0.25};
        GridSpec grid(eps, Rect{0, eps, 0, eps}, r2.radius / 2);
        SynthesisRequest base{k, std::nullopt, MultiIndex{}, ConvEngine::Fft,
                              TapMode::Midpoint};
        SynthesisRequest req2 = base;
        req2.truncation = r2;
        int K2 = tap_halfwidth(req2, eps);
        tev_disc = 0.0;
        for (int b = -K2; b <= K2; ++b)
            for (int a = -K2; a <= K2; ++a) {
                double d = eval_truncated_q(k, r2, a * eps, b * eps) -
                           eval_truncated_q(k, r1, a * eps, b * eps);
                tev_disc += d * d;
            }
        tev_disc *= eps * eps;
        tev_cont = truncation_error_variance(k, r1);
        gap_rel = std::abs(tev_disc - tev_cont) / tev_cont;
        std::vector<double> d2(n);
        parallel_for(n, [&](long t) {
            WhiteNoise noise = sample_noise(grid, derive_seed(crit_seed(2), t, 1));
            FieldSample diff = coupled_difference(base, r1, r2, noise, grid);
            d2[t] = diff.at(0, 0) * diff.at(0, 0);
        });
        double mu = mean(d2);
        double se = std::sqrt(sample_variance(d2) / n);
        z_b = std::abs(mu - tev_disc) / se;
    }

    r.pass = z_a <= 3.0 && z_b <= 3.0 && gap_rel <= 0.02;
    r.detail = strf("pixel var |dev|/se = %.2f (sigma2 %.6g); trunc var |dev|/se = %.2f; "
                    "lattice vs integral gap %.3g (thr 0.02)",
                    z_a, sig2, z_b, gap_rel);
}

// ------------------------------------------------------- 3: error power laws

void crit_error_scaling(CriterionResult& r) {
    KernelSpec rq = make_rational_quadratic(4.0);
    std::vector<double> lx, ly;
    for (double rad : {8.0, 16.0, 32.0}) {
        lx.push_back(std::log(rad));
        ly.push_back(std::log(truncation_error_variance(rq, CutoffSpec{rad, 0.25})));
    }
    double tev_slope = fit_ols(lx, ly).slope;

    KernelSpec bf = make_bargmann_fock();
    std::vector<double> ex, ey;
    for (double e : {0.4, 0.2, 0.1}) {
        ex.push_back(std::log(e));
        ey.push_back(std::log(discretisation_error_l2(bf, e)));
    }
    double disc_slope = fit_ols(ex, ey).slope;

    double ratio = discretisation_error_l2(rq, 0.1) / discretisation_error_l2(rq, 0.2);

    bool ok = std::abs(tev_slope + 6.0) <= 1.5 && std::abs(disc_slope - 2.0) <= 0.3 &&
              ratio >= 0.2 && ratio <= 0.3;
    r.pass = ok;
    r.detail = strf("truncation slope %.3f (want -6 +- 1.5); mesh slope %.3f (want 2 +- 0.3); "
                    "halving ratio %.3f (want [0.2, 0.3])",
                    tev_slope, disc_slope, ratio);
}

// ------------------------------------------------------ 4: special constants

void crit_constants(CriterionResult& r) {
    MillsConstant mc = mills_constant();
    double c_true = std::sqrt(std::numbers::pi / 2);
    double e1 = std::abs(mc.value - c_true);

    KernelSpec rq = make_rational_quadratic(4.0);
    double l1 = l1_norm(rq);
    double e2 = std::abs(l1 - std::numbers::pi) / std::numbers::pi;

    double kap0 = covariance_at(rq, 0.0, 0.0, 0.02);
    double e3 = std::abs(kap0 - std::numbers::pi / 3) / (std::numbers::pi / 3);

    r.pass = e1 <= 1e-6 && std::abs(mc.argmax) <= 1e-3 && e2 <= 1e-3 && e3 <= 1e-3;
    r.detail = strf("sup tail ratio const %.9f vs sqrt(pi/2) (|d| %.2g, argmax %.2g); "
                    "L1 %.6f vs pi (rel %.2g); kappa(0) %.6f vs pi/3 (rel %.2g)",
                    mc.value, e1, mc.argmax, l1, e2, kap0, e3);
}

// ------------------------------------------------------- 5 and 6: experiments

void crit_self_duality(CriterionResult& r) {
    ExperimentConfig cfg = default_config("self_duality");
    cfg.master_seed = crit_seed(5);
    Report rep = run_experiment(cfg);
    r.pass = rep.all_pass();
    r.detail = gates_detail(rep);
}

void crit_threshold_curve(CriterionResult& r) {
    ExperimentConfig cfg = default_config("crossing_curve");
    cfg.scales = {128};
    // the true rise at this scale is ~0.505, barely above the 0.5 gate, so the
    // criterion needs tighter statistics than the default trial count gives
    cfg.n_trials = 40000;
    cfg.master_seed = crit_seed(6);
    Report rep = run_experiment(cfg);
    r.pass = rep.all_pass();
    r.detail = gates_detail(rep);
}

// --------------------------------------------- 7: combinatorial ground truth

Labeling oracle_label(const Mask& m, Connectivity conn) {
    static const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    int nn = conn == Connectivity::Four ? 4 : 8;
    Labeling out;
    out.labels.assign(static_cast<std::size_t>(m.nx) * m.ny, -1);
    std::vector<std::pair<int, int>> stack;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            std::size_t idx = static_cast<std::size_t>(j) * m.nx + i;
            if (!m.at(i, j) || out.labels[idx] >= 0) continue;
            int32_t id = out.count++;
            out.labels[idx] = id;
            stack.assign(1, {i, j});
            while (!stack.empty()) {
                auto [ci, cj] = stack.back();
                stack.pop_back();
                for (int d = 0; d < nn; ++d) {
                    int ni = ci + dx[d], nj = cj + dy[d];
                    if (ni < 0 || nj < 0 || ni >= m.nx || nj >= m.ny) continue;
                    std::size_t nidx = static_cast<std::size_t>(nj) * m.nx + ni;
                    if (!m.at(ni, nj) || out.labels[nidx] >= 0) continue;
                    out.labels[nidx] = id;
                    stack.push_back({ni, nj});
                }
            }
        }
    return out;
}

bool oracle_cross(const Mask& m, Connectivity conn, CrossDirection dir) {
    Labeling lab = oracle_label(m, conn);
    std::vector<uint8_t> start(static_cast<std::size_t>(lab.count), 0),
        stop(static_cast<std::size_t>(lab.count), 0);
    auto tag = [&](int i, int j, std::vector<uint8_t>& side) {
        int32_t l = lab.labels[static_cast<std::size_t>(j) * m.nx + i];
        if (l >= 0) side[static_cast<std::size_t>(l)] = 1;
    };
    if (dir == CrossDirection::LeftRight) {
        for (int j = 0; j < m.ny; ++j) {
            tag(0, j, start);
            tag(m.nx - 1, j, stop);
        }
    } else {
        for (int i = 0; i < m.nx; ++i) {
            tag(i, 0, start);
            tag(i, m.ny - 1, stop);
        }
    }
    for (int32_t l = 0; l < lab.count; ++l)
        if (start[static_cast<std::size_t>(l)] && stop[static_cast<std::size_t>(l)]) return true;
    return false;
}

void crit_combinatorial(CriterionResult& r) {
    long dual_cases = 0, bad_dual = 0;
    for (auto [nx, ny] : {std::pair{3, 3}, std::pair{3, 4}}) {
        long total = 1L << (nx * ny);
        for (long code = 0; code < total; ++code) {
            Mask m{nx, ny, std::vector<uint8_t>(static_cast<std::size_t>(nx) * ny)};
            for (int b = 0; b < nx * ny; ++b) m.bits[b] = (code >> b) & 1;
            Mask c = complement(m);
            ++dual_cases;
            if (mask_crossing(m, Connectivity::Four, CrossDirection::LeftRight) ==
                mask_crossing(c, Connectivity::Eight, CrossDirection::BottomTop))
                ++bad_dual;
            if (mask_crossing(m, Connectivity::Four, CrossDirection::BottomTop) ==
                mask_crossing(c, Connectivity::Eight, CrossDirection::LeftRight))
                ++bad_dual;
        }
    }

    long bad_label = 0, bad_cross = 0;
    const long n_masks = 1000;
    const double zsel[3] = {-0.8416212335729143, 0.0, 0.8416212335729143};
    for (long t = 0; t < n_masks; ++t) {
        uint64_t ms = derive_seed(crit_seed(7), t);
        int nx = 1 + static_cast<int>(uniform_below(ms, 0, 24));
        int ny = 1 + static_cast<int>(uniform_below(ms, 1, 24));
        double z = zsel[uniform_below(ms, 2, 3)];
        Mask m{nx, ny, std::vector<uint8_t>(static_cast<std::size_t>(nx) * ny)};
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) m.set(i, j, normal_at(ms, i, j, 2) < z ? 1 : 0);
        for (Connectivity conn : {Connectivity::Four, Connectivity::Eight}) {
            Labeling got = label_components(m, conn);
            Labeling want = oracle_label(m, conn);
            if (got.count != want.count || got.labels != want.labels) ++bad_label;
            for (CrossDirection dir : {CrossDirection::LeftRight, CrossDirection::BottomTop})
                if (mask_crossing(m, conn, dir) != oracle_cross(m, conn, dir)) ++bad_cross;
        }
    }
    r.pass = bad_dual == 0 && bad_label == 0 && bad_cross == 0;
    r.detail = strf("%ld duality cases (%ld bad); %ld random masks: %ld label, %ld crossing "
                    "mismatches",
                    dual_cases, bad_dual, n_masks, bad_label, bad_cross);
}

// ------------------------------------------------------ 8: explorer validity

void crit_explorer(CriterionResult& r) {
    ExploreParams p{make_rational_quadratic(4.0), CutoffSpec{4.0, 0.25}, 1.0, 16.0, 0.0};
    GridSpec grid = explorer_grid(p);
    const double lv[3] = {-0.2, 0.0, 0.2};
    long mismatches = 0;
    {
        const long n = 1000;
        std::vector<uint8_t> bad(n, 0);
        parallel_for(n, [&](long t) {
            ExploreParams pt = p;
            pt.level = lv[t % 3];
            WhiteNoise noise = sample_noise(grid, derive_seed(crit_seed(8), t, 0));
            ExplorationTrace tr = explore_crossing(noise, pt, derive_seed(crit_seed(8), t, 1));
            bad[t] = tr.output != full_reveal_verdict(noise, pt) ? 1 : 0;
        });
        for (long t = 0; t < n; ++t) mismatches += bad[t];
    }

    // revealment: the exact floor row at R = 16, and the decreasing maximum.
    // The true decrease over these box sizes is a few parts per thousand, so
    // the run count must push the binomial error well below that.
    const long n_rev = 8000;
    double md[3], md_se[3];
    long floor_misses = -1;
    double Rs[3] = {16, 32, 64};
    for (int ri = 0; ri < 3; ++ri) {
        ExploreParams pr = p;
        pr.R = Rs[ri];
        GridSpec g = explorer_grid(pr);
        std::vector<ExplorationTrace> traces(n_rev);
        parallel_for(n_rev, [&](long t) {
            WhiteNoise noise = sample_noise(g, derive_seed(crit_seed(8), t, 10 + ri));
            traces[t] = explore_crossing(noise, pr, derive_seed(crit_seed(8), t, 20 + ri));
        });
        Revealment rv = revealment(traces);
        rv.nvx = g.nvx();
        rv.nvy = g.nvy();
        md[ri] = rv.max_delta;
        md_se[ri] = rv.max_delta_se;
        if (ri == 0) {
            // vertices within 2r of the seed segment for every seed line are
            // always revealed: the row at height R/2 over the rectangle
            floor_misses = 0;
            int wj = static_cast<int>(8 - g.ivy0());
            for (long vx = 0; vx <= 32; ++vx) {
                int wi = static_cast<int>(vx - g.ivx0());
                if (rv.delta[static_cast<std::size_t>(wj) * rv.nvx + wi] != 1.0) ++floor_misses;
            }
        }
    }
    bool decreasing = true;
    for (int ri = 0; ri + 1 < 3; ++ri)
        if (!(md[ri] > md[ri + 1])) decreasing = false;
    r.pass = mismatches == 0 && floor_misses == 0 && decreasing;
    r.detail = strf("1000 runs vs full reveal: %ld mismatches; floor row misses %ld; "
                    "max revealment %.4f > %.4f > %.4f (se %.4f, %.4f, %.4f, n=%ld)",
                    mismatches, floor_misses, md[0], md[1], md[2], md_se[0], md_se[1],
                    md_se[2], n_rev);
}

// ------------------------------------- 9: variance vs revealment * influence

void crit_osss(CriterionResult& r) {
    std::string detail;
    bool ok = true;

    // one-coordinate event: variance 1/4, revealment 1, influence 1/2
    {
        EnsembleSpec spec{0, 0, 1, 1, 1.0, crit_seed(9, 1), 4000};
        NoiseEvent ev = [](const WhiteNoise& w) { return w.at_window(0, 0) > 0; };
        TraceRunner runner = [&ev](const WhiteNoise& w, uint64_t) {
            ExplorationTrace tr;
            tr.output = ev(w) ? 1 : 0;
            tr.n_revealed = 1;
            tr.reveal_order = {0};
            tr.revealed = {1};
            return tr;
        };
        OsssAudit a = osss_audit(ev, runner, spec, 4000);
        bool good = a.margin >= -3 * a.margin_se && std::abs(a.var_hat - 0.25) <= 0.02 &&
                    std::abs(a.rhs - 0.5) <= 0.05;
        ok = ok && good;
        detail += strf("single coord margin %.3f (expect 1/4)%s", a.margin,
                       good ? "" : " FAIL");
    }

    // majority of three, including the saturating comparison of the two
    // influence notions
    {
        EnsembleSpec spec{0, 0, 3, 1, 1.0, crit_seed(9, 2), 6000};
        NoiseEvent ev = [](const WhiteNoise& w) {
            int c = (w.at_window(0, 0) > 0) + (w.at_window(1, 0) > 0) + (w.at_window(2, 0) > 0);
            return c >= 2;
        };
        TraceRunner runner = [&ev](const WhiteNoise& w, uint64_t) {
            ExplorationTrace tr;
            tr.output = ev(w) ? 1 : 0;
            tr.n_revealed = 3;
            tr.reveal_order = {0, 1, 2};
            tr.revealed = {1, 1, 1};
            return tr;
        };
        OsssAudit a = osss_audit(ev, runner, spec, 6000);
        InfluenceEstimate res = influence_resampling(ev, spec);
        InfluenceEstimate rus = influence_russo(ev, spec);
        double c = mills_constant().value;
        bool good = a.margin >= -3 * a.margin_se;
        double worst_chain = -1e300, worst_res = 0, worst_rus = 0;
        for (int v = 0; v < 3; ++v) {
            double slack = 4.0 * std::sqrt(res.resampling_se[v] * res.resampling_se[v] +
                                           c * c * rus.russo_se[v] * rus.russo_se[v]);
            worst_chain = std::max(worst_chain,
                                   res.resampling[v] - c * rus.russo[v] - slack);
            worst_res = std::max(worst_res, std::abs(res.resampling[v] - 0.25) /
                                                res.resampling_se[v]);
            worst_rus = std::max(worst_rus,
                                 std::abs(rus.russo[v] - 0.5 * normal_pdf(0.0)) /
                                     rus.russo_se[v]);
        }
        good = good && worst_chain <= 0 && worst_res <= 3.0 && worst_rus <= 3.0;
        ok = ok && good;
        detail += strf("; majority margin %.3f, chain slack %.3g, |dev|/se res %.2f rus %.2f%s",
                       a.margin, worst_chain, worst_res, worst_rus, good ? "" : " FAIL");
    }

    // the exploration algorithm on a small crossing event
    {
        ExploreParams p{make_rational_quadratic(4.0), CutoffSpec{2.0, 0.25}, 0.5, 4.0, 0.0};
        GridSpec grid = explorer_grid(p);
        EnsembleSpec spec = ensemble_from_grid(grid, crit_seed(9, 3), 1500);
        SynthesisRequest req{p.kernel, p.truncation, MultiIndex{}, ConvEngine::Direct,
                             TapMode::Midpoint};
        NoiseEvent ev = [&](const WhiteNoise& w) {
            FieldSample f = synthesize(req, w, grid);
            return !mask_crossing(complement(excursion_mask(f, p.level)), Connectivity::Eight,
                                  CrossDirection::BottomTop);
        };
        TraceRunner runner = [&](const WhiteNoise& w, uint64_t s) {
            return explore_crossing(w, p, s);
        };
        OsssAudit a = osss_audit(ev, runner, spec, 1500);
        bool good = a.margin >= -3 * a.margin_se;
        ok = ok && good;
        detail += strf("; crossing var %.4f <= rhs %.4f (margin %.4f, se %.4f)%s", a.var_hat,
                       a.rhs, a.margin, a.margin_se, good ? "" : " FAIL");
    }

    r.pass = ok;
    r.detail = detail;
}

// ---------------------------------------------- 10: level-derivative formula

void crit_russo(CriterionResult& r) {
    std::string detail;
    bool ok = true;

    // threshold event at one pixel, everything in closed form
    {
        KernelSpec k = make_bargmann_fock();
        const double eps = 0.25, level = 0.3, h = 0.05;
        GridSpec grid(eps, Rect{0, eps, 0, eps}, support_radius(k, std::nullopt));
        SynthesisRequest req{k, std::nullopt, MultiIndex{}, ConvEngine::Direct,
                             TapMode::Midpoint};
        LevelEvent ev = [](const FieldSample& f, double l) { return f.at(0, 0) >= -l; };
        RussoCheck rc = russo_derivative_check(req, grid, ev, level, h, crit_seed(10, 1), 40000);
        int K = tap_halfwidth(req, eps);
        double s1 = 0, s2 = 0;
        for (int b = -K; b <= K; ++b)
            for (int a = -K; a <= K; ++a) {
                double q = eval_q(k, a * eps, b * eps);
                s1 += q;
                s2 += q * q;
            }
        double sigma = eps * std::sqrt(s2);
        double fd_exact =
            (normal_cdf((level + h) / sigma) - normal_cdf((level - h) / sigma)) / (2 * h);
        double rhs_exact =
            (eps / l1_norm(k)) * eps * s1 * normal_pdf(level / sigma) / sigma;
        double z_lhs = std::abs(rc.lhs - fd_exact) / rc.lhs_se;
        double z_rhs = std::abs(rc.rhs - rhs_exact) / rc.rhs_se;
        bool good = z_lhs <= 3.0 && z_rhs <= 3.0;
        ok = ok && good;
        detail += strf("point event: lhs %.4f (|dev|/se %.2f), rhs %.4f (|dev|/se %.2f)%s",
                       rc.lhs, z_lhs, rc.rhs, z_rhs, good ? "" : " FAIL");
    }

    // left-right crossing of a square with a truncated kernel
    {
        KernelSpec k = make_rational_quadratic(4.0);
        CutoffSpec cut{8.0, 0.25};
        GridSpec grid(1.0, Rect{0, 24, 0, 24}, cut.radius / 2);
        SynthesisRequest req{k, cut, MultiIndex{}, ConvEngine::Fft, TapMode::Midpoint};
        LevelEvent ev = [](const FieldSample& f, double l) {
            return crossing(f, CrossingQuery{f.grid.extent(), CrossDirection::LeftRight,
                                             Side::Primal, l});
        };
        RussoCheck rc = russo_derivative_check(req, grid, ev, 0.0, 0.04, crit_seed(10, 2), 60000);
        bool good = rc.rel_gap <= 0.10;
        ok = ok && good;
        detail += strf("; crossing: lhs %.4f rhs %.4f rel gap %.3f (thr 0.10)%s", rc.lhs,
                       rc.rhs, rc.rel_gap, good ? "" : " FAIL");
    }

    r.pass = ok;
    r.detail = detail;
}

// ----------------------------------------- 11 to 13: experiment-driven gates

void crit_quasi_independence(CriterionResult& r) {
    ExperimentConfig cfg = default_config("quasi_independence");
    cfg.master_seed = crit_seed(11);
    Report rep = run_experiment(cfg);
    r.pass = rep.all_pass();
    r.detail = gates_detail(rep);
}

void crit_arm_decay(CriterionResult& r) {
    ExperimentConfig cfg = default_config("arm_decay");
    cfg.master_seed = crit_seed(12);
    Report rep = run_experiment(cfg);
    r.pass = rep.all_pass();
    r.detail = gates_detail(rep);
}

void crit_near_critical(CriterionResult& r) {
    ExperimentConfig cfg = default_config("near_critical");
    cfg.master_seed = crit_seed(13);
    Report rep = run_experiment(cfg);
    r.pass = rep.all_pass();
    r.detail = gates_detail(rep);
}

// -------------------------------------------------- 14: tails and level shifts

void crit_tails(CriterionResult& r) {
    ExperimentConfig tail = default_config("sup_norm_tail");
    tail.master_seed = crit_seed(14, 1);
    Report rep_tail = run_experiment(tail);

    ExperimentConfig cm = default_config("cameron_martin");
    cm.master_seed = crit_seed(14, 2);
    Report rep_cm = run_experiment(cm);

    // doubling the amplitude doubles every field value exactly, so threshold
    // events at doubled thresholds are bitwise identical
    double worst_amp = 0.0;
    {
        GridSpec grid(0.5, Rect{-4, 4, -4, 4},
                      support_radius(make_bargmann_fock(), std::nullopt));
        SynthesisRequest r1{make_bargmann_fock(1.0), std::nullopt, MultiIndex{},
                            ConvEngine::Fft, TapMode::Midpoint};
        SynthesisRequest r2{make_bargmann_fock(2.0), std::nullopt, MultiIndex{},
                            ConvEngine::Fft, TapMode::Midpoint};
        for (long t = 0; t < 20; ++t) {
            WhiteNoise noise = sample_noise(grid, derive_seed(crit_seed(14, 3), t));
            FieldSample f1 = synthesize(r1, noise, grid);
            FieldSample f2 = synthesize(r2, noise, grid);
            for (std::size_t i = 0; i < f1.values.size(); ++i)
                worst_amp = std::max(worst_amp, std::abs(2 * f1.values[i] - f2.values[i]));
        }
    }

    r.pass = rep_tail.all_pass() && rep_cm.all_pass() && worst_amp == 0.0;
    r.detail = gates_detail(rep_tail) + "; " + gates_detail(rep_cm) +
               strf("; amplitude doubling max |2 f - f'| = %.1g (exact)", worst_amp);
}

// -------------------------------------------- 15: recursive bound certificates

void crit_recursion(CriterionResult& r) {
    ExperimentConfig cfg = default_config("bootstrap_recursion");
    Report rep = run_experiment(cfg);

    // cross-check the log-space iteration against plain arithmetic while the
    // numbers are still representable
    const BootstrapParams bp;
    double worst = 0.0;
    {
        double la = std::log(bp.exp_a0), a = bp.exp_a0, R = bp.exp_r0;
        for (int it = 0; it < 8; ++it) {
            la = log_sum_exp(std::log(bp.exp_c1) + 2 * la, -bp.exp_c2 * R);
            a = bp.exp_c1 * a * a + std::exp(-bp.exp_c2 * R);
            double lr = std::log(R);
            R = 2 * (R + R / (lr * lr));
            worst = std::max(worst, std::abs(la - std::log(a)));
        }
        double lm = std::log(bp.poly_r1);
        la = std::log(bp.poly_a0);
        a = bp.poly_a0;
        for (int it = 0; it < 8; ++it) {
            double m = std::exp(lm);
            la = log_sum_exp(log_sum_exp(std::log(bp.poly_c1) + 2 * la, -bp.poly_c2 * lm + la),
                             -bp.poly_c2 * lm * lm);
            a = bp.poly_c1 * a * a + std::pow(m, -bp.poly_c2) * a +
                std::exp(-bp.poly_c2 * lm * lm);
            lm += std::log(3.0);
            worst = std::max(worst, std::abs(la - std::log(a)));
        }
    }

    r.pass = rep.all_pass() && worst <= 1e-9;
    r.detail = gates_detail(rep) + strf("; log-space vs direct max |diff| %.2g", worst);
}

// ------------------------------------------------------- 16: reproducibility

std::string strip_runtime(const std::string& s) {
    std::string out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t nl = s.find('\n', pos);
        if (nl == std::string::npos) nl = s.size();
        std::string line = s.substr(pos, nl - pos);
        if (line.find("\"runtime_s\"") == std::string::npos) out += line + "\n";
        pos = nl + 1;
    }
    return out;
}

void crit_reproducibility(CriterionResult& r) {
    ExperimentConfig cfg = default_config("crossing_curve");
    cfg.scales = {16};
    cfg.levels = {-0.1, 0.0, 0.1};
    cfg.n_trials = 60;
    cfg.master_seed = crit_seed(16);

    int saved = thread_override().load();
    thread_override().store(1);
    Report a = run_experiment(cfg);
    Report a2 = run_experiment(cfg);
    thread_override().store(2);
    Report b = run_experiment(cfg);
    thread_override().store(saved);

    bool csv_ok = a.csv() == b.csv() && a.csv() == a2.csv();
    bool sum_ok = strip_runtime(a.summary_json()) == strip_runtime(b.summary_json()) &&
                  strip_runtime(a.summary_json()) == strip_runtime(a2.summary_json());
    r.pass = csv_ok && sum_ok;
    r.detail = strf("csv bytes identical across repeat and 1 vs 2 workers: %s; "
                    "summaries identical modulo runtime: %s",
                    csv_ok ? "yes" : "NO", sum_ok ? "yes" : "NO");
}

struct Entry {
    const char* name;
    bool quick;
    void (*fn)(CriterionResult&);
};

const Entry& entry(int i) {
    static const Entry entries[16] = {
        {"covariance_match", false, crit_covariance},
        {"variance_identities", false, crit_variance},
        {"error_scaling", true, crit_error_scaling},
        {"closed_form_constants", true, crit_constants},
        {"square_self_duality", false, crit_self_duality},
        {"sharp_threshold_curve", false, crit_threshold_curve},
        {"combinatorial_exactness", true, crit_combinatorial},
        {"explorer_validity", false, crit_explorer},
        {"variance_influence_bound", false, crit_osss},
        {"derivative_formula", false, crit_russo},
        {"distant_decorrelation", false, crit_quasi_independence},
        {"arm_decay_fit", false, crit_arm_decay},
        {"near_critical_trends", false, crit_near_critical},
        {"field_tail_bounds", false, crit_tails},
        {"recursion_certificates", true, crit_recursion},
        {"reproducibility", true, crit_reproducibility},
    };
    return entries[i];
}

} // namespace

const std::vector<std::string>& criterion_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (int i = 0; i < 16; ++i) v.push_back(entry(i).name);
        return v;
    }();
    return names;
}

std::vector<CriterionResult> run_acceptance(
    AcceptProfile profile, const std::function<void(const CriterionResult&)>& on_done) {
    std::vector<CriterionResult> out;
    for (int i = 0; i < 16; ++i) {
        CriterionResult r;
        r.id = i + 1;
        r.name = entry(i).name;
        if (profile == AcceptProfile::Quick && !entry(i).quick) {
            r.skipped = true;
            r.pass = true;
            r.detail = "skipped (quick profile)";
        } else {
            auto t0 = std::chrono::steady_clock::now();
            try {
                entry(i).fn(r);
            } catch (const std::exception& e) {
                r.pass = false;
                r.detail = std::string("exception: ") + e.what();
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
        }
        if (on_done) on_done(r);
        out.push_back(std::move(r));
    }
    return out;
}

std::string acceptance_json(const std::vector<CriterionResult>& results) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    int passed = 0, failed = 0, skipped = 0;
    for (const auto& r : results) {
        nlohmann::ordered_json e;
        e["id"] = r.id;
        e["name"] = r.name;
        e["pass"] = r.pass;
        e["skipped"] = r.skipped;
        e["detail"] = r.detail;
        arr.push_back(e);
        if (r.skipped)
            ++skipped;
        else if (r.pass)
            ++passed;
        else
            ++failed;
    }
    j["criteria"] = arr;
    j["passed"] = passed;
    j["failed"] = failed;
    j["skipped"] = skipped;
    j["all_pass"] = failed == 0;
    return j.dump(2) + "\n";
}

bool acceptance_pass(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.skipped && !r.pass) return false;
    return true;
}

} // namespace gfp
