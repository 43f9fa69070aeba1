#include "doctest.h"

#include "gfp/field.hpp"
#include "gfp/io.hpp"
#include "gfp/noise.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>

using namespace gfp;

namespace {

std::string tmp_path(const std::string& name) {
    static bool made = false;
    std::filesystem::path dir = std::filesystem::temp_directory_path() / "gfp_io_tests";
    if (!made) {
        std::filesystem::create_directories(dir);
        made = true;
    }
    return (dir / name).string();
}

Mask make_mask(int nx, int ny, std::initializer_list<int> bits) {
    Mask m;
    m.nx = nx;
    m.ny = ny;
    m.bits.assign(bits.begin(), bits.end());
    return m;
}

} // namespace

TEST_CASE("field dump round trip is value-exact") {
    FieldDump d;
    d.nx = 3;
    d.ny = 2;
    d.eps = 0.25;
    d.x0 = -1.0;
    d.y0 = 0.5;
    d.values = {1.0 / 3.0, -0.0, 1e-300, 2.375, -17.25, 0.1};
    std::string path = tmp_path("dump.gf2");
    write_field(path, d);

    FieldDump r = read_field(path);
    CHECK(r.nx == 3);
    CHECK(r.ny == 2);
    CHECK(r.eps == 0.25);
    CHECK(r.x0 == -1.0);
    CHECK(r.y0 == 0.5);
    REQUIRE(r.values.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(r.values[i] == d.values[i]);
    CHECK(std::signbit(r.values[1]));   // binary payload keeps the sign of -0.0

    // header is plain text, payload raw doubles
    std::string raw = read_text_file(path);
    CHECK(raw.rfind("GFIELD2 3 2 0.25 -1 0.5\n", 0) == 0);
    CHECK(raw.size() == std::string("GFIELD2 3 2 0.25 -1 0.5\n").size() + 6 * sizeof(double));
}

TEST_CASE("field dump of a synthesized sample keeps grid metadata") {
    GridSpec grid(0.5, Rect{0.0, 2.0, 0.0, 1.0}, 2.0);
    WhiteNoise noise = sample_noise(grid, 42);
    SynthesisRequest req{make_bargmann_fock(), CutoffSpec{2.0, 0.25}, {}, ConvEngine::Direct,
                         TapMode::Midpoint};
    FieldSample f = synthesize(req, noise, grid);
    std::string path = tmp_path("sample.gf2");
    write_field(path, f);
    FieldDump r = read_field(path);
    CHECK(r.nx == grid.nx());
    CHECK(r.ny == grid.ny());
    CHECK(r.eps == grid.eps());
    CHECK(r.x0 == 0.0);
    CHECK(r.y0 == 0.0);
    CHECK(r.values == f.values);
}

TEST_CASE("field dump error handling") {
    FieldDump d;
    d.nx = 2;
    d.ny = 2;
    d.values = {1.0, 2.0, 3.0};   // size mismatch
    CHECK_THROWS_AS(write_field(tmp_path("bad.gf2"), d), std::invalid_argument);

    CHECK_THROWS_AS(read_field(tmp_path("does_not_exist.gf2")), std::runtime_error);
    FieldDump one;
    one.nx = 1;
    one.ny = 1;
    one.values = {0.0};
    CHECK_THROWS_AS(write_field("/nonexistent_dir_gfp/x.gf2", one), std::runtime_error);

    write_text_file(tmp_path("corrupt.gf2"), "NOTMAGIC 2 2 1 0 0\n");
    CHECK_THROWS_AS(read_field(tmp_path("corrupt.gf2")), std::runtime_error);
    write_text_file(tmp_path("short.gf2"), "GFIELD2 4 4 1 0 0\nonly a few bytes");
    CHECK_THROWS_AS(read_field(tmp_path("short.gf2")), std::runtime_error);
}

TEST_CASE("mask pgm bytes: set pixels dark, rows flipped top-down") {
    Mask m = make_mask(2, 2, {1, 0, 0, 1});   // bottom row: set, clear; top row: clear, set
    std::string path = tmp_path("mask.pgm");
    write_mask_pgm(path, m);
    std::string raw = read_text_file(path);
    std::string expect = "P5\n2 2\n255\n";
    expect += '\xff';   // top row first: (0,1) clear
    expect += '\x00';   //               (1,1) set
    expect += '\x00';   // bottom row:   (0,0) set
    expect += '\xff';   //               (1,0) clear
    CHECK(raw == expect);

    Mask empty;
    CHECK_THROWS_AS(write_mask_pgm(tmp_path("empty.pgm"), empty), std::invalid_argument);
    CHECK_THROWS_AS(write_mask_pgm("/nonexistent_dir_gfp/m.pgm", m), std::runtime_error);
}

TEST_CASE("largest component extraction") {
    // component a: three cells in the bottom-left; component b: two on the right
    Mask m = make_mask(4, 3,
                       {1, 1, 0, 1,
                        1, 0, 0, 1,
                        0, 0, 0, 0});
    Mask big = largest_component_mask(m);
    CHECK(big.nx == 4);
    CHECK(big.ny == 3);
    CHECK(big.bits == std::vector<uint8_t>({1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0}));

    // tie: both components have two cells; the first label in raster order wins
    Mask tie = make_mask(5, 1, {1, 1, 0, 1, 1});
    Mask kept = largest_component_mask(tie);
    CHECK(kept.bits == std::vector<uint8_t>({1, 1, 0, 0, 0}));

    Mask none = make_mask(3, 2, {0, 0, 0, 0, 0, 0});
    Mask still_none = largest_component_mask(none);
    CHECK(still_none.bits == std::vector<uint8_t>(6, 0));

    // the result is always a subset of the input
    for (std::size_t p = 0; p < big.bits.size(); ++p)
        if (big.bits[p]) CHECK(m.bits[p]);
}

TEST_CASE("kernel table file round trip") {
    KernelTable t;
    t.n = 3;
    t.mesh = 0.1;
    t.values = {1.0 / 3.0, 0.1, -2.5e-17, 0.5, 1.0, 0.5, 0.25, 0.125, 4e300};
    std::string path = tmp_path("kernel.qtab");
    write_qtab(path, t);
    KernelTable r = read_qtab(path);
    CHECK(r.n == 3);
    CHECK(r.mesh == 0.1);
    CHECK(r.values == t.values);   // %.17g survives the decimal round trip

    std::string raw = read_text_file(path);
    CHECK(raw.rfind("QTAB 3 0.10000000000000001\n", 0) == 0);

    KernelTable bad;
    bad.n = 2;
    bad.values.assign(4, 1.0);
    CHECK_THROWS_AS(write_qtab(tmp_path("bad.qtab"), bad), std::invalid_argument);
    bad.n = 3;   // values no longer n * n
    CHECK_THROWS_AS(write_qtab(tmp_path("bad.qtab"), bad), std::invalid_argument);

    CHECK_THROWS_AS(read_qtab(tmp_path("missing.qtab")), std::runtime_error);
    write_text_file(tmp_path("header.qtab"), "QTAB 2 0.1\n1 1 1 1\n");
    CHECK_THROWS_AS(read_qtab(tmp_path("header.qtab")), std::runtime_error);
    write_text_file(tmp_path("trunc.qtab"), "QTAB 3 0.1\n1 2 3 4\n");
    CHECK_THROWS_AS(read_qtab(tmp_path("trunc.qtab")), std::runtime_error);
}

TEST_CASE("text file round trip and hashing") {
    std::string content = "line one\nline two\n";
    content += '\0';
    content += "after nul";
    std::string path = tmp_path("text.txt");
    write_text_file(path, content);
    CHECK(read_text_file(path) == content);
    CHECK_THROWS_AS(read_text_file(tmp_path("missing.txt")), std::runtime_error);

    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("hello") == 0xa430d84680aabd0bull);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("hello") == "a430d84680aabd0b");
    CHECK(fnv1a_hex("x").size() == 16);
}
