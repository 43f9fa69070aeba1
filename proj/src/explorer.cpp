#include "gfp/explorer.hpp"

#include "gfp/rng.hpp"
#include "gfp/stats.hpp"
#include "gfp/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace gfp {

GridSpec explorer_grid(const ExploreParams& p) {
    validate_kernel(p.kernel);
    validate_cutoff(p.truncation);
    if (!(p.eps > 0) || !(p.R > 0)) throw std::invalid_argument("explorer: bad eps or R");
    if (p.truncation.radius < 2.0 * p.eps)
        throw std::invalid_argument("explorer: truncation radius must be at least 2 eps");
    return GridSpec(p.eps, Rect{0.0, 2.0 * p.R, 0.0, p.R}, p.truncation.radius);
}

namespace {

std::vector<std::pair<int, int>> disc_offsets(double radius, double eps) {
    int K = static_cast<int>(std::floor(radius / eps + 1e-9));
    std::vector<std::pair<int, int>> out;
    double r2 = (radius / eps) * (radius / eps) * (1.0 + 1e-12);
    for (int b = -K; b <= K; ++b)
        for (int a = -K; a <= K; ++a)
            if (a * a + b * b <= r2) out.emplace_back(a, b);
    return out;
}

} // namespace

ExplorationTrace explore_crossing(const WhiteNoise& noise, const ExploreParams& p,
                                  uint64_t algo_seed) {
    GridSpec grid = explorer_grid(p);
    SynthesisRequest req{p.kernel, p.truncation, {}, ConvEngine::Fft, TapMode::Midpoint};
    FieldSample field = synthesize(req, noise, grid);

    const int nx = grid.nx(), ny = grid.ny(), pad = grid.pad_px();
    const int nvx = grid.nvx(), nvy = grid.nvy();
    const double r = p.truncation.radius;

    ExplorationTrace tr;
    tr.revealed.assign(static_cast<std::size_t>(nvx) * nvy, 0);

    const long m = static_cast<long>(std::floor(p.R / r + 1e-9));
    tr.k = static_cast<int>(uniform_below(algo_seed, 0, static_cast<uint64_t>(m) + 1));
    const int jL = std::min(static_cast<int>(std::lround(tr.k * r / p.eps)), ny - 1);
    const double yL = jL * p.eps + grid.extent().y0;

    const auto safety_disc = disc_offsets(r, p.eps);
    const auto reveal_disc = disc_offsets(2.0 * r, p.eps);

    // per-pixel count of still-unrevealed vertices within the safety radius
    std::vector<int32_t> unsafe_cnt(grid.n_pixels(), 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int32_t c = 0;
            for (auto [a, b] : safety_disc) {
                int wi = i + pad + a, wj = j + pad + b;
                if (wi >= 0 && wj >= 0 && wi < nvx && wj < nvy) ++c;
            }
            unsafe_cnt[grid.pixel_index(i, j)] = c;
        }

    std::vector<uint8_t> safe(grid.n_pixels(), 0), blocked(grid.n_pixels(), 0);
    for (std::size_t pi = 0; pi < grid.n_pixels(); ++pi)
        blocked[pi] = field.values[pi] >= -p.level ? 0 : 1;

    // clusters of reached pixels live in a union-find forest; a pixel is
    // reached iff parent >= 0.  Wall contact is tracked per root because two
    // distinct clusters may touch opposite walls without forming a crossing,
    // and clusters can merge later through a freshly safe pixel.
    std::vector<int32_t> parent(grid.n_pixels(), -1);
    std::vector<uint8_t> at_bottom(grid.n_pixels(), 0), at_top(grid.n_pixels(), 0);
    bool crossed = false;
    auto find = [&](int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](int32_t a, int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b);   // smaller pixel index stays root
        parent[b] = a;
        at_bottom[a] |= at_bottom[b];
        at_top[a] |= at_top[b];
        if (at_bottom[a] && at_top[a]) crossed = true;
    };

    std::vector<int32_t> newly_safe;
    std::vector<int32_t> frontier_candidates;

    auto for_each_nbr8 = [&](int i, int j, auto&& fn) {
        for (int b = -1; b <= 1; ++b)
            for (int a = -1; a <= 1; ++a) {
                if (!a && !b) continue;
                int ni = i + a, nj = j + b;
                if (ni >= 0 && nj >= 0 && ni < nx && nj < ny) fn(ni, nj);
            }
    };

    std::deque<int32_t> bfs;
    auto try_reach = [&](int i, int j) {
        std::size_t pi = grid.pixel_index(i, j);
        if (parent[pi] != -1 || !safe[pi] || !blocked[pi]) return;
        parent[pi] = static_cast<int32_t>(pi);
        bfs.push_back(static_cast<int32_t>(pi));
        while (!bfs.empty()) {
            int32_t cur = bfs.front();
            bfs.pop_front();
            int ci = static_cast<int>(cur % nx), cj = static_cast<int>(cur / nx);
            int32_t root = find(cur);
            if (cj == 0) at_bottom[root] = 1;
            if (cj == ny - 1) at_top[root] = 1;
            if (at_bottom[root] && at_top[root]) crossed = true;
            frontier_candidates.push_back(cur);
            for_each_nbr8(ci, cj, [&](int ni, int nj) {
                std::size_t np = grid.pixel_index(ni, nj);
                if (!safe[np] || !blocked[np]) return;
                if (parent[np] == -1) {
                    parent[np] = cur;
                    bfs.push_back(static_cast<int32_t>(np));
                } else {
                    unite(cur, static_cast<int32_t>(np));
                }
            });
        }
    };

    auto reveal_vertex = [&](int wi, int wj) {
        std::size_t vi = static_cast<std::size_t>(wj) * nvx + wi;
        if (tr.revealed[vi]) return;
        tr.revealed[vi] = 1;
        tr.reveal_order.push_back(static_cast<int32_t>(vi));
        for (auto [a, b] : safety_disc) {
            int i = wi - pad + a, j = wj - pad + b;
            if (i < 0 || j < 0 || i >= nx || j >= ny) continue;
            std::size_t pi = grid.pixel_index(i, j);
            if (--unsafe_cnt[pi] == 0) {
                safe[pi] = 1;
                newly_safe.push_back(static_cast<int32_t>(pi));
            }
        }
    };

    auto process_newly_safe = [&]() {
        std::sort(newly_safe.begin(), newly_safe.end());
        // connect fresh safe blocked pixels into the reached cluster
        for (int32_t pi : newly_safe) {
            int i = static_cast<int>(pi % nx), j = static_cast<int>(pi / nx);
            if (!blocked[pi]) continue;
            if (j == jL) {
                try_reach(i, j);
                continue;
            }
            bool adj = false;
            for_each_nbr8(i, j, [&](int ni, int nj) {
                adj = adj || parent[grid.pixel_index(ni, nj)] != -1;
            });
            if (adj) try_reach(i, j);
        }
        newly_safe.clear();
    };

    // initial reveal: everything within 2r of the seed segment [0, 2R] x {yL}
    {
        const double x_lo = grid.extent().x0, x_hi = grid.extent().x1;
        for (int wj = 0; wj < nvy; ++wj) {
            double vy = (grid.ivy0() + wj) * p.eps;
            double dy = vy - yL;
            for (int wi = 0; wi < nvx; ++wi) {
                double vx = (grid.ivx0() + wi) * p.eps;
                double dx = vx < x_lo ? x_lo - vx : (vx > x_hi ? vx - x_hi : 0.0);
                if (dx * dx + dy * dy <= 4.0 * r * r * (1.0 + 1e-12))
                    reveal_vertex(wi, wj);
            }
        }
        process_newly_safe();
    }

    std::vector<int32_t> to_reveal;
    for (;;) {
        if (crossed) {
            tr.output = 0;
            break;
        }
        // frontier: reached pixels that still touch an unsafe pixel
        to_reveal.clear();
        std::size_t kept = 0;
        for (std::size_t ci = 0; ci < frontier_candidates.size(); ++ci) {
            int32_t pi = frontier_candidates[ci];
            int i = static_cast<int>(pi % nx), j = static_cast<int>(pi / nx);
            bool live = false;
            for_each_nbr8(i, j, [&](int ni, int nj) {
                live = live || !safe[grid.pixel_index(ni, nj)];
            });
            if (!live) continue;   // safe halo complete, can never be frontier again
            frontier_candidates[kept++] = pi;
            for (auto [a, b] : reveal_disc) {
                int wi = i + pad + a, wj = j + pad + b;
                if (wi < 0 || wj < 0 || wi >= nvx || wj >= nvy) continue;
                std::size_t vi = static_cast<std::size_t>(wj) * nvx + wi;
                if (!tr.revealed[vi]) to_reveal.push_back(static_cast<int32_t>(vi));
            }
        }
        frontier_candidates.resize(kept);
        if (to_reveal.empty()) {
            if (kept != 0)
                throw std::logic_error("explorer: live frontier with nothing to reveal");
            tr.output = 1;
            break;
        }
        std::sort(to_reveal.begin(), to_reveal.end());
        to_reveal.erase(std::unique(to_reveal.begin(), to_reveal.end()), to_reveal.end());
        for (int32_t vi : to_reveal)
            reveal_vertex(static_cast<int>(vi % nvx), static_cast<int>(vi / nvx));
        process_newly_safe();
    }

    tr.n_revealed = static_cast<long>(tr.reveal_order.size());
    return tr;
}

int full_reveal_verdict(const WhiteNoise& noise, const ExploreParams& p) {
    GridSpec grid = explorer_grid(p);
    SynthesisRequest req{p.kernel, p.truncation, {}, ConvEngine::Fft, TapMode::Midpoint};
    FieldSample field = synthesize(req, noise, grid);
    Mask dual = complement(excursion_mask(field, p.level));
    return mask_crossing(dual, Connectivity::Eight, CrossDirection::BottomTop) ? 0 : 1;
}

Revealment revealment(std::span<const ExplorationTrace> traces) {
    if (traces.empty()) throw std::invalid_argument("revealment: no traces");
    const std::size_t nv = traces.front().revealed.size();
    Revealment rev;
    rev.n_runs = static_cast<long>(traces.size());
    std::vector<long> counts(nv, 0);
    for (const auto& t : traces) {
        if (t.revealed.size() != nv)
            throw std::invalid_argument("revealment: traces from different geometries");
        for (std::size_t v = 0; v < nv; ++v) counts[v] += t.revealed[v];
    }
    rev.delta.resize(nv);
    rev.se.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        Binomial b = binomial_estimate(counts[v], rev.n_runs);
        rev.delta[v] = b.p_hat;
        rev.se[v] = b.se;
        if (b.p_hat > rev.max_delta) {
            rev.max_delta = b.p_hat;
            rev.max_delta_se = b.se;
        }
    }
    return rev;
}

} // namespace gfp
