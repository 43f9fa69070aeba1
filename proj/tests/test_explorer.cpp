#include "doctest.h"

#include "gfp/explorer.hpp"
#include "gfp/rng.hpp"
#include "gfp/topology.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

using namespace gfp;

namespace {

ExploreParams base_params(double R) {
    ExploreParams p;
    p.kernel = make_rational_quadratic(4.0);
    p.truncation = CutoffSpec{4.0, 0.25};
    p.eps = 1.0;
    p.R = R;
    p.level = 0.0;
    return p;
}

} // namespace

TEST_CASE("explorer grid geometry and parameter validation") {
    ExploreParams p = base_params(8.0);
    GridSpec g = explorer_grid(p);
    CHECK(g.extent().x0 == 0.0);
    CHECK(g.extent().x1 == 16.0);
    CHECK(g.extent().y0 == 0.0);
    CHECK(g.extent().y1 == 8.0);
    CHECK(g.nx() == 16);
    CHECK(g.ny() == 8);
    CHECK(g.pad_px() == 4);
    CHECK(g.nvx() == 24);
    CHECK(g.nvy() == 16);
    CHECK(g.ivx0() == -4);
    CHECK(g.ivy0() == -4);

    ExploreParams bad = p;
    bad.eps = 0.0;
    CHECK_THROWS_AS(explorer_grid(bad), std::invalid_argument);
    bad = p;
    bad.R = 0.0;
    CHECK_THROWS_AS(explorer_grid(bad), std::invalid_argument);
    bad = p;
    bad.truncation.radius = 1.5;   // below 2 * eps
    CHECK_THROWS_AS(explorer_grid(bad), std::invalid_argument);
    bad = p;
    bad.kernel = make_rational_quadratic(4.0);
    bad.kernel.beta = 1.5;
    CHECK_THROWS_AS(explorer_grid(bad), std::invalid_argument);
}

TEST_CASE("explorer output on sign-forced noise") {
    ExploreParams p = base_params(8.0);
    GridSpec g = explorer_grid(p);
    WhiteNoise noise = sample_noise(g, 1);

    // all vertices strongly positive: the field is positive everywhere, so the
    // complement of the excursion set is empty and no dual crossing can exist
    for (double& v : noise.values) v = 3.0;
    ExplorationTrace hi = explore_crossing(noise, p, 5);
    CHECK(hi.output == 1);
    CHECK(full_reveal_verdict(noise, p) == 1);

    for (double& v : noise.values) v = -3.0;
    ExplorationTrace lo = explore_crossing(noise, p, 5);
    CHECK(lo.output == 0);
    CHECK(full_reveal_verdict(noise, p) == 0);
}

TEST_CASE("explorer output equals the fully revealed verdict") {
    ExploreParams p = base_params(8.0);
    GridSpec g = explorer_grid(p);
    const double levels[3] = {-0.15, 0.0, 0.15};
    long zeros = 0, ones = 0;
    for (long t = 0; t < 300; ++t) {
        ExploreParams pt = p;
        pt.level = levels[t % 3];
        WhiteNoise noise = sample_noise(g, derive_seed(9100, t));
        ExplorationTrace tr = explore_crossing(noise, pt, derive_seed(9200, t));
        int truth = full_reveal_verdict(noise, pt);
        REQUIRE(tr.output == truth);
        (truth ? ones : zeros) += 1;
    }
    // both outcomes must actually occur, otherwise the check is vacuous
    CHECK(zeros > 30);
    CHECK(ones > 30);
}

TEST_CASE("exploration traces are deterministic and internally consistent") {
    ExploreParams p = base_params(8.0);
    p.level = 0.1;
    GridSpec g = explorer_grid(p);
    WhiteNoise noise = sample_noise(g, 321);

    ExplorationTrace a = explore_crossing(noise, p, 77);
    ExplorationTrace b = explore_crossing(noise, p, 77);
    CHECK(a.output == b.output);
    CHECK(a.k == b.k);
    CHECK(a.n_revealed == b.n_revealed);
    CHECK(a.reveal_order == b.reveal_order);
    CHECK(a.revealed == b.revealed);

    const std::size_t nv = static_cast<std::size_t>(g.nvx()) * g.nvy();
    REQUIRE(a.revealed.size() == nv);
    CHECK(a.n_revealed == static_cast<long>(a.reveal_order.size()));
    std::set<int32_t> seen;
    for (int32_t vi : a.reveal_order) {
        CHECK(vi >= 0);
        CHECK(vi < static_cast<int32_t>(nv));
        CHECK(seen.insert(vi).second);   // no vertex revealed twice
        CHECK(a.revealed[static_cast<std::size_t>(vi)] == 1);
    }
    long marked = std::count(a.revealed.begin(), a.revealed.end(), uint8_t{1});
    CHECK(marked == a.n_revealed);
    CHECK(a.n_revealed > 0);
    CHECK(a.n_revealed <= static_cast<long>(nv));
}

TEST_CASE("seed line index covers its whole range") {
    ExploreParams p = base_params(16.0);
    GridSpec g = explorer_grid(p);
    WhiteNoise noise = sample_noise(g, 1234);
    std::set<int> ks;
    for (long s = 0; s < 100; ++s) {
        ExplorationTrace tr = explore_crossing(noise, p, derive_seed(9300, s));
        CHECK(tr.k >= 0);
        CHECK(tr.k <= 4);   // floor(R / r) with R = 16, r = 4
        ks.insert(tr.k);
    }
    CHECK(ks.size() == 5);
}

TEST_CASE("revealment frequencies and the always-revealed mid row") {
    ExploreParams p = base_params(16.0);
    GridSpec g = explorer_grid(p);
    std::vector<ExplorationTrace> traces(300);
    for (long t = 0; t < 300; ++t) {
        WhiteNoise noise = sample_noise(g, derive_seed(9400, t));
        traces[t] = explore_crossing(noise, p, derive_seed(9500, t));
    }
    Revealment rv = revealment(traces);
    CHECK(rv.n_runs == 300);
    REQUIRE(rv.delta.size() == static_cast<std::size_t>(g.nvx()) * g.nvy());
    REQUIRE(rv.se.size() == rv.delta.size());
    for (double d : rv.delta) {
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }

    // the row at height R/2 is within 2r of every admissible seed line, so the
    // initial reveal always covers it: its frequency is exactly one
    const int wj = static_cast<int>(8 - g.ivy0());
    for (long vx = 0; vx <= 32; ++vx) {
        int wi = static_cast<int>(vx - g.ivx0());
        CHECK(rv.delta[static_cast<std::size_t>(wj) * g.nvx() + wi] == 1.0);
    }
    CHECK(rv.max_delta == 1.0);

    CHECK_THROWS_AS(revealment(std::span<const ExplorationTrace>{}), std::invalid_argument);
    ExploreParams small = base_params(8.0);
    GridSpec gs = explorer_grid(small);
    WhiteNoise ns = sample_noise(gs, 7);
    std::vector<ExplorationTrace> mixed = {traces[0], explore_crossing(ns, small, 7)};
    CHECK_THROWS_AS(revealment(mixed), std::invalid_argument);
}

TEST_CASE("explorer rejects noise that does not match the grid") {
    ExploreParams p = base_params(8.0);
    // wrong mesh
    WhiteNoise fine = sample_noise_window(-8, -8, 50, 34, 0.5, 3);
    CHECK_THROWS_AS(explore_crossing(fine, p, 1), std::invalid_argument);
    // right mesh, window too small to cover pixels plus padding
    WhiteNoise tiny = sample_noise_window(0, 0, 17, 9, 1.0, 3);
    CHECK_THROWS_AS(explore_crossing(tiny, p, 1), std::invalid_argument);
}
