#pragma once
// Excursion-set combinatorics on the pixel grid.
//
// The excursion mask at level l is {f >= -l} (equality counts as inside).
// Primal events live on that mask with 4-connectivity; Dual events live on
// its complement with 8-connectivity.  With that convention the grid duality
// is exact: a mask has a left-right primal crossing of a rectangle if and
// only if its complement has no bottom-top dual crossing.

#include "gfp/field.hpp"
#include "gfp/grid.hpp"

#include <cstdint>
#include <vector>

namespace gfp {

enum class Side { Primal, Dual };
enum class Connectivity { Four, Eight };
enum class CrossDirection { LeftRight, BottomTop };

struct Mask {
    int nx = 0, ny = 0;
    std::vector<uint8_t> bits;  // 1 = pixel in the set
    uint8_t at(int i, int j) const { return bits[static_cast<std::size_t>(j) * nx + i]; }
    void set(int i, int j, uint8_t v) { bits[static_cast<std::size_t>(j) * nx + i] = v; }
};

Mask excursion_mask(const FieldSample& f, double level);
Mask complement(const Mask& m);

struct Labeling {
    std::vector<int32_t> labels;  // -1 outside the set, else dense component id
    int32_t count = 0;
};
// Union-find two-pass labeling; ids are dense and ordered by first pixel in
// raster order, so the result is reproducible.
Labeling label_components(const Mask& m, Connectivity conn);

// Crossing of the whole mask between its designated boundary lines.
bool mask_crossing(const Mask& m, Connectivity conn, CrossDirection dir);

struct CrossingQuery {
    Rect rect;          // sub-rectangle of the field extent
    CrossDirection dir = CrossDirection::LeftRight;
    Side side = Side::Primal;
    double level = 0.0;
};
bool crossing(const FieldSample& f, const CrossingQuery& q);

struct ArmQuery {
    double cx = 0, cy = 0;
    double rho1 = 0, rho2 = 0;  // 0 < rho1 < rho2, outer ball inside the extent
    Side side = Side::Primal;
    double level = 0.0;
};
// Connection of the queried side across the annulus: a component meeting both
// the inner boundary ring and the outer boundary ring of annulus pixels.
bool arm_event(const FieldSample& f, const ArmQuery& q);

} // namespace gfp
