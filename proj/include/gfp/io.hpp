#pragma once

#include "gfp/field.hpp"
#include "gfp/kernel.hpp"
#include "gfp/topology.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gfp {

// Raw grid-of-doubles dump. Header "GFIELD2 <nx> <ny> <eps> <x0> <y0>\n",
// then nx*ny little-endian float64, row-major with rows bottom-up (row j = 0
// is the bottom row, matching in-memory layout).
struct FieldDump {
    int nx = 0, ny = 0;
    double eps = 0, x0 = 0, y0 = 0;
    std::vector<double> values;
};

void write_field(const std::string& path, const FieldDump& dump);
void write_field(const std::string& path, const FieldSample& sample);
FieldDump read_field(const std::string& path);

// Binary PGM (P5), maxval 255: 0 = pixel in the excursion set, 255 =
// complement. Image rows are written top-down as PGM expects.
void write_mask_pgm(const std::string& path, const Mask& mask);

// Keeps only the largest 4-connected component of the mask (ties broken by
// first label appearance, i.e. raster order), for the highlighted render.
Mask largest_component_mask(const Mask& mask);

// Tabulated kernel file: "QTAB <n> <mesh>\n" then n*n reals, row-major,
// centred at the origin. Written with %.17g so a round trip is value-exact.
KernelTable read_qtab(const std::string& path);
void write_qtab(const std::string& path, const KernelTable& table);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a, for content hashes in run manifests.
uint64_t fnv1a(const std::string& bytes);
std::string fnv1a_hex(const std::string& bytes);

} // namespace gfp
