// core/include/revoice/fft.h
#ifndef REVOICE_FFT_H_
#define REVOICE_FFT_H_

#include <complex>
#include <cstdint>
#include <vector>

namespace revoice {

// In-place iterative radix-2 FFT. Length must be a power of two.
void fft(std::vector<std::complex<double>>& x, bool inverse);

// Forward FFT of a real signal zero-padded to n (power of two).
// Returns the full n-point complex spectrum.
std::vector<std::complex<double>> fft_real(const std::vector<double>& x, size_t n);

size_t next_pow2(size_t n);

}  // namespace revoice

#endif  // REVOICE_FFT_H_
