#include "mevo/fft.hpp"

#include <cmath>

#include "mevo/errors.hpp"

namespace mevo {

Fft::Fft(std::size_t m) : m_(m) {
  if (m == 0 || (m & (m - 1)) != 0)
    throw ConfigError("FFT size must be a power of two, got " + std::to_string(m));
  rev_.resize(m);
  std::size_t bits = 0;
  while ((std::size_t(1) << bits) < m) ++bits;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (bits - 1 - b);
    rev_[i] = r;
  }
  tw_.resize(m / 2);
  const double step = -2.0 * M_PI / static_cast<double>(m);
  for (std::size_t j = 0; j < m / 2; ++j)
    tw_[j] = std::complex<double>(std::cos(step * double(j)), std::sin(step * double(j)));
}

void Fft::transform(std::complex<double>* a, bool inv) const {
  for (std::size_t i = 0; i < m_; ++i)
    if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
  for (std::size_t len = 2; len <= m_; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t stride = m_ / len;
    for (std::size_t base = 0; base < m_; base += len) {
      for (std::size_t j = 0; j < half; ++j) {
        std::complex<double> w = tw_[j * stride];
        if (inv) w = std::conj(w);
        std::complex<double> u = a[base + j];
        std::complex<double> t = a[base + j + half] * w;
        a[base + j] = u + t;
        a[base + j + half] = u - t;
      }
    }
  }
}

void Fft::forward(std::complex<double>* a) const { transform(a, false); }

void Fft::inverse(std::complex<double>* a) const {
  transform(a, true);
  const double s = 1.0 / static_cast<double>(m_);
  for (std::size_t i = 0; i < m_; ++i) a[i] *= s;
}

}  // namespace mevo
