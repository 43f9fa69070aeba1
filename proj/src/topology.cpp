#include "gfp/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gfp {

namespace {

struct Dsu {
    std::vector<int32_t> parent;
    explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int32_t find(int32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(int32_t a, int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[b] = a;
    }
    bool connected(int32_t a, int32_t b) { return find(a) == find(b); }
};

// neighbour offsets scanned when labeling left-to-right, bottom-to-top:
// previously visited neighbours only
constexpr int kPrev4[2][2] = {{-1, 0}, {0, -1}};
constexpr int kPrev8[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

} // namespace

Mask excursion_mask(const FieldSample& f, double level) {
    Mask m;
    m.nx = f.grid.nx();
    m.ny = f.grid.ny();
    m.bits.resize(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i)
        m.bits[i] = f.values[i] >= -level ? 1 : 0;
    return m;
}

Mask complement(const Mask& m) {
    Mask c = m;
    for (auto& b : c.bits) b = b ? 0 : 1;
    return c;
}

Labeling label_components(const Mask& m, Connectivity conn) {
    Labeling out;
    out.labels.assign(m.bits.size(), -1);
    Dsu dsu(m.bits.size());
    const int infour = conn == Connectivity::Four ? 2 : 4;
    const auto* prev = conn == Connectivity::Four ? kPrev4 : kPrev8;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            if (!m.at(i, j)) continue;
            int32_t me = static_cast<int32_t>(j * m.nx + i);
            for (int t = 0; t < infour; ++t) {
                int ni = i + prev[t][0], nj = j + prev[t][1];
                if (ni < 0 || nj < 0 || ni >= m.nx || nj >= m.ny) continue;
                if (m.at(ni, nj)) dsu.unite(me, static_cast<int32_t>(nj * m.nx + ni));
            }
        }
    // dense ids in order of first appearance
    std::vector<int32_t> remap(m.bits.size(), -1);
    for (std::size_t p = 0; p < m.bits.size(); ++p) {
        if (!m.bits[p]) continue;
        int32_t root = dsu.find(static_cast<int32_t>(p));
        if (remap[root] < 0) remap[root] = out.count++;
        out.labels[p] = remap[root];
    }
    return out;
}

bool mask_crossing(const Mask& m, Connectivity conn, CrossDirection dir) {
    if (m.nx <= 0 || m.ny <= 0) throw std::invalid_argument("mask_crossing: empty mask");
    const std::size_t n = m.bits.size();
    Dsu dsu(n + 2);
    const int32_t sideA = static_cast<int32_t>(n), sideB = static_cast<int32_t>(n + 1);
    const int infour = conn == Connectivity::Four ? 2 : 4;
    const auto* prev = conn == Connectivity::Four ? kPrev4 : kPrev8;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            if (!m.at(i, j)) continue;
            int32_t me = static_cast<int32_t>(j * m.nx + i);
            if (dir == CrossDirection::LeftRight) {
                if (i == 0) dsu.unite(sideA, me);
                if (i == m.nx - 1) dsu.unite(sideB, me);
            } else {
                if (j == 0) dsu.unite(sideA, me);
                if (j == m.ny - 1) dsu.unite(sideB, me);
            }
            for (int t = 0; t < infour; ++t) {
                int ni = i + prev[t][0], nj = j + prev[t][1];
                if (ni < 0 || nj < 0 || ni >= m.nx || nj >= m.ny) continue;
                if (m.at(ni, nj)) dsu.unite(me, static_cast<int32_t>(nj * m.nx + ni));
            }
        }
    return dsu.connected(sideA, sideB);
}

namespace {

// pixel index range covered by a closed interval [a, b] on one axis; the
// interval must stay inside the sampled extent but may touch its edges, where
// the half-open pixel tiling has no centre (indices clamp to existing pixels)
void pixel_range(const GridSpec& g, double a, double b, bool xaxis, int& lo, int& hi) {
    double eps = g.eps();
    double elo = xaxis ? g.extent().x0 : g.extent().y0;
    double ehi = xaxis ? g.extent().x1 : g.extent().y1;
    if (a < elo - 1e-9 || b > ehi + 1e-9 || !(b > a))
        throw std::invalid_argument("crossing: rectangle leaves the sampled extent");
    long base = xaxis ? g.ix0() : g.iy0();
    int n = xaxis ? g.nx() : g.ny();
    lo = std::max(0, static_cast<int>(std::ceil(a / eps - 1e-9) - base));
    hi = std::min(n - 1, static_cast<int>(std::floor(b / eps + 1e-9) - base));
    if (lo > hi) throw std::invalid_argument("crossing: rectangle contains no pixel centres");
}

} // namespace

bool crossing(const FieldSample& f, const CrossingQuery& q) {
    int i0, i1, j0, j1;
    pixel_range(f.grid, q.rect.x0, q.rect.x1, true, i0, i1);
    pixel_range(f.grid, q.rect.y0, q.rect.y1, false, j0, j1);
    Mask sub;
    sub.nx = i1 - i0 + 1;
    sub.ny = j1 - j0 + 1;
    sub.bits.resize(static_cast<std::size_t>(sub.nx) * sub.ny);
    const bool primal = q.side == Side::Primal;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            bool in = f.at(i, j) >= -q.level;
            sub.set(i - i0, j - j0, primal ? in : !in);
        }
    return mask_crossing(sub, primal ? Connectivity::Four : Connectivity::Eight, q.dir);
}

bool arm_event(const FieldSample& f, const ArmQuery& q) {
    if (!(q.rho1 > 0) || !(q.rho2 > q.rho1))
        throw std::invalid_argument("arm_event: need 0 < rho1 < rho2");
    const Rect& e = f.grid.extent();
    if (q.cx - q.rho2 < e.x0 - 1e-9 || q.cx + q.rho2 > e.x1 + 1e-9 ||
        q.cy - q.rho2 < e.y0 - 1e-9 || q.cy + q.rho2 > e.y1 + 1e-9)
        throw std::invalid_argument("arm_event: outer ball leaves the sampled extent");

    // bounding box of the outer ball in pixel indices
    int i0, i1, j0, j1;
    pixel_range(f.grid, q.cx - q.rho2, q.cx + q.rho2, true, i0, i1);
    pixel_range(f.grid, q.cy - q.rho2, q.cy + q.rho2, false, j0, j1);
    const int bnx = i1 - i0 + 1, bny = j1 - j0 + 1;
    const double r1sq = q.rho1 * q.rho1, r2sq = q.rho2 * q.rho2;
    auto dist2 = [&](int i, int j) {
        double dx = f.grid.x_of(i) - q.cx, dy = f.grid.y_of(j) - q.cy;
        return dx * dx + dy * dy;
    };
    // 0 = outside annulus, 1 = annulus, 2 = annulus and queried side
    std::vector<uint8_t> cell(static_cast<std::size_t>(bnx) * bny, 0);
    const bool primal = q.side == Side::Primal;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            double d2 = dist2(i, j);
            if (d2 < r1sq || d2 > r2sq) continue;
            bool in = f.at(i, j) >= -q.level;
            cell[static_cast<std::size_t>(j - j0) * bnx + (i - i0)] = (primal ? in : !in) ? 2 : 1;
        }
    auto occupied = [&](int bi, int bj) {
        return cell[static_cast<std::size_t>(bj) * bnx + bi] == 2;
    };
    // ring membership via 4-neighbour radii (neighbours may leave the box)
    auto inner_ring = [&](int i, int j) {
        return dist2(i - 1, j) < r1sq || dist2(i + 1, j) < r1sq ||
               dist2(i, j - 1) < r1sq || dist2(i, j + 1) < r1sq;
    };
    auto outer_ring = [&](int i, int j) {
        return dist2(i - 1, j) > r2sq || dist2(i + 1, j) > r2sq ||
               dist2(i, j - 1) > r2sq || dist2(i, j + 1) > r2sq;
    };

    const std::size_t n = static_cast<std::size_t>(bnx) * bny;
    Dsu dsu(n + 2);
    const int32_t ringIn = static_cast<int32_t>(n), ringOut = static_cast<int32_t>(n + 1);
    bool have_in = false, have_out = false;
    const int infour = primal ? 2 : 4;
    const auto* prev = primal ? kPrev4 : kPrev8;
    for (int bj = 0; bj < bny; ++bj)
        for (int bi = 0; bi < bnx; ++bi) {
            if (!occupied(bi, bj)) continue;
            int32_t me = static_cast<int32_t>(bj * bnx + bi);
            int gi = bi + i0, gj = bj + j0;
            if (inner_ring(gi, gj)) { dsu.unite(ringIn, me); have_in = true; }
            if (outer_ring(gi, gj)) { dsu.unite(ringOut, me); have_out = true; }
            for (int t = 0; t < infour; ++t) {
                int ni = bi + prev[t][0], nj = bj + prev[t][1];
                if (ni < 0 || nj < 0 || ni >= bnx || nj >= bny) continue;
                if (occupied(ni, nj)) dsu.unite(me, static_cast<int32_t>(nj * bnx + ni));
            }
        }
    // also require the rings themselves to exist in the annulus discretisation
    bool ring_in_exists = false, ring_out_exists = false;
    for (int bj = 0; bj < bny && !(ring_in_exists && ring_out_exists); ++bj)
        for (int bi = 0; bi < bnx; ++bi) {
            if (!cell[static_cast<std::size_t>(bj) * bnx + bi]) continue;
            if (inner_ring(bi + i0, bj + j0)) ring_in_exists = true;
            if (outer_ring(bi + i0, bj + j0)) ring_out_exists = true;
        }
    if (!ring_in_exists || !ring_out_exists)
        throw std::invalid_argument("arm_event: annulus too thin for this mesh (empty boundary ring)");
    return have_in && have_out && dsu.connected(ringIn, ringOut);
}

} // namespace gfp
