#pragma once
// Counter-based random numbers (Philox4x32-10).
//
// Every random quantity in this library is a pure function of a 64-bit seed
// and a small integer counter.  In particular the white-noise value attached
// to a lattice vertex depends only on (seed, vertex integer coordinates), so
// enlarging a sampling window never changes the values already drawn.

#include <cmath>
#include <cstdint>
#include <cstring>

namespace gfp {

namespace detail {

inline void philox_mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    uint64_t p = static_cast<uint64_t>(a) * static_cast<uint64_t>(b);
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

struct PhiloxState {
    uint32_t c[4];
    uint32_t k[2];
};

inline void philox_round(PhiloxState& s) {
    constexpr uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    uint32_t hi0, lo0, hi1, lo1;
    philox_mulhilo(M0, s.c[0], hi0, lo0);
    philox_mulhilo(M1, s.c[2], hi1, lo1);
    uint32_t n0 = hi1 ^ s.c[1] ^ s.k[0];
    uint32_t n1 = lo1;
    uint32_t n2 = hi0 ^ s.c[3] ^ s.k[1];
    uint32_t n3 = lo0;
    s.c[0] = n0; s.c[1] = n1; s.c[2] = n2; s.c[3] = n3;
    s.k[0] += 0x9E3779B9u;   // golden-ratio Weyl constants
    s.k[1] += 0xBB67AE85u;
}

inline void philox4x32(uint64_t key, uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                       uint32_t out[4]) {
    PhiloxState s{{c0, c1, c2, c3},
                  {static_cast<uint32_t>(key), static_cast<uint32_t>(key >> 32)}};
    for (int r = 0; r < 10; ++r) philox_round(s);
    out[0] = s.c[0]; out[1] = s.c[1]; out[2] = s.c[2]; out[3] = s.c[3];
}

} // namespace detail

// Standard normal attached to lattice vertex (ix, iy).  `stream` separates
// independent uses of the same vertex (0 = base noise, 1 = resampling).
inline double normal_at(uint64_t seed, int32_t ix, int32_t iy, uint32_t stream = 0) {
    uint32_t o[4];
    detail::philox4x32(seed, static_cast<uint32_t>(ix), static_cast<uint32_t>(iy),
                       stream, 0u, o);
    // 53-bit uniform in (0,1) for the radius, 32-bit for the angle.
    uint64_t u53 = (static_cast<uint64_t>(o[0] >> 5) << 26) | (o[1] >> 6);
    double u1 = (static_cast<double>(u53) + 0.5) * 0x1p-53;
    double u2 = (static_cast<double>(o[2]) + 0.5) * 0x1p-32;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// 64 derived bits for seeding sub-streams: trials, experiments, algorithm draws.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0) {
    uint32_t o[4];
    detail::philox4x32(seed, static_cast<uint32_t>(a), static_cast<uint32_t>(a >> 32),
                       static_cast<uint32_t>(b), static_cast<uint32_t>(b >> 32), o);
    return (static_cast<uint64_t>(o[0]) << 32) | o[1];
}

// Uniform draw on {0, ..., n-1}.  Modulo bias is < 2^-32 for the small n used
// here (seed-line choice in the exploration algorithm).
inline uint64_t uniform_below(uint64_t seed, uint64_t a, uint64_t n) {
    return derive_seed(seed, a, 0x756e6966u) % n;
}

} // namespace gfp
