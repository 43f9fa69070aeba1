#include "gfp/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gfp {

namespace {

[[noreturn]] void io_fail(const std::string& what, const std::string& path) {
    throw std::runtime_error(what + ": " + path);
}

} // namespace

void write_field(const std::string& path, const FieldDump& d) {
    if (d.nx <= 0 || d.ny <= 0 ||
        d.values.size() != static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny))
        throw std::invalid_argument("write_field: inconsistent dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail("write_field: cannot open", path);
    char header[160];
    int len = std::snprintf(header, sizeof header, "GFIELD2 %d %d %.17g %.17g %.17g\n", d.nx,
                            d.ny, d.eps, d.x0, d.y0);
    out.write(header, len);
    out.write(reinterpret_cast<const char*>(d.values.data()),
              static_cast<std::streamsize>(d.values.size() * sizeof(double)));
    if (!out) io_fail("write_field: write failed", path);
}

void write_field(const std::string& path, const FieldSample& s) {
    FieldDump d;
    d.nx = s.grid.nx();
    d.ny = s.grid.ny();
    d.eps = s.grid.eps();
    d.x0 = s.grid.extent().x0;
    d.y0 = s.grid.extent().y0;
    d.values = s.values;
    write_field(path, d);
}

FieldDump read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail("read_field: cannot open", path);
    std::string line;
    if (!std::getline(in, line)) io_fail("read_field: missing header", path);
    FieldDump d;
    char magic[16] = {0};
    if (std::sscanf(line.c_str(), "%15s %d %d %lg %lg %lg", magic, &d.nx, &d.ny, &d.eps, &d.x0,
                    &d.y0) != 6 ||
        std::strcmp(magic, "GFIELD2") != 0 || d.nx <= 0 || d.ny <= 0)
        io_fail("read_field: bad header", path);
    d.values.resize(static_cast<std::size_t>(d.nx) * static_cast<std::size_t>(d.ny));
    in.read(reinterpret_cast<char*>(d.values.data()),
            static_cast<std::streamsize>(d.values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(d.values.size() * sizeof(double)))
        io_fail("read_field: truncated payload", path);
    return d;
}

void write_mask_pgm(const std::string& path, const Mask& m) {
    if (m.nx <= 0 || m.ny <= 0) throw std::invalid_argument("write_mask_pgm: empty mask");
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail("write_mask_pgm: cannot open", path);
    out << "P5\n" << m.nx << " " << m.ny << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(m.nx));
    for (int j = m.ny - 1; j >= 0; --j) {   // PGM rows top-down, grid rows bottom-up
        for (int i = 0; i < m.nx; ++i) row[static_cast<std::size_t>(i)] = m.at(i, j) ? 0 : 255;
        out.write(reinterpret_cast<const char*>(row.data()), m.nx);
    }
    if (!out) io_fail("write_mask_pgm: write failed", path);
}

Mask largest_component_mask(const Mask& m) {
    Labeling lab = label_components(m, Connectivity::Four);
    Mask out;
    out.nx = m.nx;
    out.ny = m.ny;
    out.bits.assign(m.bits.size(), 0);
    if (lab.count == 0) return out;
    std::vector<long> area(static_cast<std::size_t>(lab.count), 0);
    for (std::size_t p = 0; p < m.bits.size(); ++p)
        if (lab.labels[p] >= 0) ++area[static_cast<std::size_t>(lab.labels[p])];
    int32_t best = 0;
    for (int32_t c = 1; c < lab.count; ++c)
        if (area[static_cast<std::size_t>(c)] > area[static_cast<std::size_t>(best)]) best = c;
    for (std::size_t p = 0; p < m.bits.size(); ++p) out.bits[p] = lab.labels[p] == best;
    return out;
}

KernelTable read_qtab(const std::string& path) {
    std::ifstream in(path);
    if (!in) io_fail("read_qtab: cannot open", path);
    std::string magic;
    KernelTable t;
    if (!(in >> magic >> t.n >> t.mesh) || magic != "QTAB" || t.n < 3 || !(t.mesh > 0))
        io_fail("read_qtab: bad header", path);
    t.values.resize(static_cast<std::size_t>(t.n) * static_cast<std::size_t>(t.n));
    for (auto& v : t.values)
        if (!(in >> v)) io_fail("read_qtab: truncated table", path);
    return t;
}

void write_qtab(const std::string& path, const KernelTable& t) {
    if (t.n < 3 || t.values.size() != static_cast<std::size_t>(t.n) * static_cast<std::size_t>(t.n))
        throw std::invalid_argument("write_qtab: inconsistent table");
    std::ofstream out(path);
    if (!out) io_fail("write_qtab: cannot open", path);
    char buf[64];
    std::snprintf(buf, sizeof buf, "QTAB %d %.17g\n", t.n, t.mesh);
    out << buf;
    for (int j = 0; j < t.n; ++j) {
        for (int i = 0; i < t.n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", t.values[static_cast<std::size_t>(j) * t.n + i]);
            out << buf << (i + 1 == t.n ? '\n' : ' ');
        }
    }
    if (!out) io_fail("write_qtab: write failed", path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail("read_text_file: cannot open", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail("write_text_file: cannot open", path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) io_fail("write_text_file: write failed", path);
}

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

} // namespace gfp
