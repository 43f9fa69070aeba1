#pragma once
// Sampling geometry.  A GridSpec ties together the lattice mesh eps, a
// rectangular extent whose corners lie on the lattice, and a padding margin.
// Pixels tile the extent half-open: pixel (i, j) sits at lattice coordinates
// (ix0 + i, iy0 + j), position coordinates eps * lattice.  White noise lives
// on the vertex window, which is the pixel window grown by the padding ring.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace gfp {

struct Rect {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

namespace detail {
inline long lattice_coord(double x, double eps, const char* what) {
    double q = x / eps;
    double r = std::nearbyint(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
        throw std::invalid_argument(std::string(what) +
            " must be an integer multiple of eps (got " + std::to_string(x) +
            " with eps " + std::to_string(eps) + ")");
    return static_cast<long>(r);
}
} // namespace detail

class GridSpec {
public:
    GridSpec(double eps, Rect extent, double padding) : eps_(eps), extent_(extent), padding_(padding) {
        if (!(eps > 0)) throw std::invalid_argument("GridSpec: eps must be positive");
        if (!(padding >= 0)) throw std::invalid_argument("GridSpec: padding must be nonnegative");
        if (!(extent.x1 > extent.x0) || !(extent.y1 > extent.y0))
            throw std::invalid_argument("GridSpec: empty extent");
        ix0_ = detail::lattice_coord(extent.x0, eps, "extent.x0");
        iy0_ = detail::lattice_coord(extent.y0, eps, "extent.y0");
        nx_ = static_cast<int>(detail::lattice_coord(extent.x1, eps, "extent.x1") - ix0_);
        ny_ = static_cast<int>(detail::lattice_coord(extent.y1, eps, "extent.y1") - iy0_);
        pad_px_ = static_cast<int>(std::ceil(padding / eps - 1e-9));
    }

    double eps() const { return eps_; }
    const Rect& extent() const { return extent_; }
    double padding() const { return padding_; }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    long ix0() const { return ix0_; }
    long iy0() const { return iy0_; }
    std::size_t n_pixels() const { return static_cast<std::size_t>(nx_) * ny_; }

    int pad_px() const { return pad_px_; }
    int nvx() const { return nx_ + 2 * pad_px_; }
    int nvy() const { return ny_ + 2 * pad_px_; }
    long ivx0() const { return ix0_ - pad_px_; }
    long ivy0() const { return iy0_ - pad_px_; }
    std::size_t n_vertices() const { return static_cast<std::size_t>(nvx()) * nvy(); }

    double x_of(int i) const { return static_cast<double>(ix0_ + i) * eps_; }
    double y_of(int j) const { return static_cast<double>(iy0_ + j) * eps_; }
    std::size_t pixel_index(int i, int j) const {
        return static_cast<std::size_t>(j) * nx_ + i;
    }

    bool operator==(const GridSpec& o) const {
        return eps_ == o.eps_ && ix0_ == o.ix0_ && iy0_ == o.iy0_ &&
               nx_ == o.nx_ && ny_ == o.ny_ && pad_px_ == o.pad_px_;
    }

private:
    double eps_;
    Rect extent_;
    double padding_;
    long ix0_, iy0_;
    int nx_, ny_;
    int pad_px_;
};

struct MultiIndex {
    int dx = 0, dy = 0;
    int order() const { return dx + dy; }
    bool operator==(const MultiIndex& o) const { return dx == o.dx && dy == o.dy; }
};

} // namespace gfp
