// ctfkit/fft.hpp
//
// Thin RAII wrapper over FFTW for 2D complex transforms. Planning uses
// FFTW_ESTIMATE so plans (and therefore results) are reproducible.

#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace ctfkit {

class Fft2D
{
public:
  Fft2D(std::size_t n_x, std::size_t n_y);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  std::size_t n_x() const { return m_nx; }
  std::size_t n_y() const { return m_ny; }

  /// Unnormalised forward transform, in place, row-major (row = y).
  void forward(std::span<std::complex<double>> data);
  /// Inverse transform scaled by 1/(n_x n_y), in place.
  void inverse(std::span<std::complex<double>> data);

private:
  void run(void* plan, std::span<std::complex<double>> data);

  std::size_t m_nx;
  std::size_t m_ny;
  std::complex<double>* m_buffer = nullptr;
  void* m_forward = nullptr;
  void* m_inverse = nullptr;
};

} // namespace ctfkit
