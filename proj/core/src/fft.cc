// core/src/fft.cc
#include "revoice/fft.h"

#include <cmath>

#include "revoice/base/error.h"

namespace revoice {

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& x, bool inverse) {
  const size_t n = x.size();
  if (n == 0) return;
  if ((n & (n - 1)) != 0) throw DataError("fft length must be a power of two");

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : x) v *= inv;
  }
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& x, size_t n) {
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  const size_t m = std::min(x.size(), n);
  for (size_t i = 0; i < m; ++i) buf[i] = {x[i], 0.0};
  fft(buf, false);
  return buf;
}

}  // namespace revoice
