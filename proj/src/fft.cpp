#include "ctfkit/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <stdexcept>

namespace ctfkit {

namespace {

// The FFTW planner is not thread safe.
std::mutex& planner_mutex()
{
  static std::mutex m;
  return m;
}

} // namespace

Fft2D::Fft2D(std::size_t n_x, std::size_t n_y) : m_nx(n_x), m_ny(n_y)
{
  if (n_x == 0 || n_y == 0)
    throw std::invalid_argument("empty FFT");
  const std::size_t n = n_x * n_y;
  m_buffer = reinterpret_cast<std::complex<double>*>(
      fftw_malloc(sizeof(fftw_complex) * n));
  if (!m_buffer)
    throw std::bad_alloc();
  auto* buf = reinterpret_cast<fftw_complex*>(m_buffer);

  std::lock_guard lock(planner_mutex());
  m_forward = fftw_plan_dft_2d(int(n_y), int(n_x), buf, buf, FFTW_FORWARD,
                               FFTW_ESTIMATE);
  m_inverse = fftw_plan_dft_2d(int(n_y), int(n_x), buf, buf, FFTW_BACKWARD,
                               FFTW_ESTIMATE);
  if (!m_forward || !m_inverse) {
    if (m_forward)
      fftw_destroy_plan(static_cast<fftw_plan>(m_forward));
    if (m_inverse)
      fftw_destroy_plan(static_cast<fftw_plan>(m_inverse));
    fftw_free(m_buffer);
    throw std::runtime_error("FFTW planning failed");
  }
}

Fft2D::~Fft2D()
{
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(m_forward));
  fftw_destroy_plan(static_cast<fftw_plan>(m_inverse));
  fftw_free(m_buffer);
}

void Fft2D::run(void* plan, std::span<std::complex<double>> data)
{
  if (data.size() != m_nx * m_ny)
    throw std::invalid_argument("FFT size mismatch");
  std::copy(data.begin(), data.end(), m_buffer);
  fftw_execute(static_cast<fftw_plan>(plan));
  std::copy(m_buffer, m_buffer + data.size(), data.begin());
}

void Fft2D::forward(std::span<std::complex<double>> data)
{
  run(m_forward, data);
}

void Fft2D::inverse(std::span<std::complex<double>> data)
{
  run(m_inverse, data);
  const double scale = 1.0 / double(m_nx * m_ny);
  for (auto& v : data)
    v *= scale;
}

} // namespace ctfkit
