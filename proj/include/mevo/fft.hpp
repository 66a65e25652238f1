#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mevo {

// Radix-2 complex FFT with precomputed twiddles and bit-reversal table.
// Power-of-two sizes only. A plan is immutable after construction and safe
// to share across threads; transforms are bitwise deterministic.
class Fft {
 public:
  explicit Fft(std::size_t m);  // throws ConfigError unless m is a power of two >= 1

  std::size_t size() const { return m_; }
  void forward(std::complex<double>* a) const;  // in place
  void inverse(std::complex<double>* a) const;  // in place, includes the 1/m factor

 private:
  void transform(std::complex<double>* a, bool inv) const;

  std::size_t m_;
  std::vector<std::size_t> rev_;
  std::vector<std::complex<double>> tw_;  // exp(-2*pi*i*j/m), j < m/2
};

}  // namespace mevo
