#pragma once
// Thin FFT layer over FFTW.  Plans use FFTW_ESTIMATE only, so the chosen
// algorithm depends on the transform size alone and results are reproducible
// bit-for-bit across runs and worker counts.  Plan creation is serialised;
// each thread executes on its own buffers.

#include <complex>
#include <vector>

namespace gfp {

// Smallest 5-smooth (2^a 3^b 5^c) integer >= n; good FFT sizes.
int next_fft_size(int n);

// Real-to-complex FFT of a row-major [ny][nx] array; output [ny][nx/2 + 1].
std::vector<std::complex<double>> rfft2(const std::vector<double>& a, int ny, int nx);

// Unnormalised inverse of rfft2.
std::vector<double> irfft2(const std::vector<std::complex<double>>& s, int ny, int nx);

// In-place complex FFT (unnormalised), row-major [ny][nx].
void cfft2_inplace(std::vector<std::complex<double>>& a, int ny, int nx, bool inverse);

} // namespace gfp
