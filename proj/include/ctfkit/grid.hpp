// ctfkit/grid.hpp
//
// Uniform Cartesian sampling of reciprocal space (and its real-space
// conjugate). Sample (i, j) is row i (q_y) and column j (q_x); the centre
// sample (n_y/2, n_x/2) sits exactly on q = 0.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ctfkit {

class RealGrid
{
public:
  RealGrid(std::size_t n_x, std::size_t n_y, double pixel_size);

  std::size_t n_x() const { return m_nx; }
  std::size_t n_y() const { return m_ny; }
  std::size_t size() const { return m_nx * m_ny; }
  /// Angstrom per pixel.
  double pixel_size() const { return m_pixel; }
  double pixel_area() const { return m_pixel * m_pixel; }
  /// Nyquist frequency, 1 / (2 pixel_size).
  double q_max() const { return 0.5 / m_pixel; }

  bool operator==(const RealGrid&) const = default;

private:
  std::size_t m_nx;
  std::size_t m_ny;
  double m_pixel;
};

/// Quadrature nodes over a frequency grid. For the full layout there is one
/// node per grid sample with unit multiplicity (stored as an empty vector);
/// the radial layout merges all samples sharing the same integer radius
/// a^2 + b^2 and carries the count as the multiplicity. Either way
/// sum(multiplicity * f) * cell_area is the same midpoint Riemann sum.
struct QuadratureNodes
{
  std::vector<double> q_norm;
  std::vector<double> q_x;
  std::vector<double> q_y;
  std::vector<double> multiplicity;

  std::size_t size() const { return q_norm.size(); }
  double weight(std::size_t k) const
  {
    return multiplicity.empty() ? 1.0 : multiplicity[k];
  }
};

enum class NodeLayout
{
  full,
  radial,
};

class FrequencyGrid
{
public:
  /// Square grid; n even and >= 8, q_max > 0 (1/Angstrom).
  FrequencyGrid(std::size_t n, double q_max);
  FrequencyGrid(std::size_t n_x, std::size_t n_y, double q_max);

  std::size_t n_x() const { return m_nx; }
  std::size_t n_y() const { return m_ny; }
  std::size_t size() const { return m_nx * m_ny; }
  double q_max() const { return m_qmax; }
  double spacing_x() const { return 2.0 * m_qmax / double(m_nx); }
  double spacing_y() const { return 2.0 * m_qmax / double(m_ny); }
  double cell_area() const { return spacing_x() * spacing_y(); }

  double q_x(std::size_t j) const;
  double q_y(std::size_t i) const;
  double q_norm(std::size_t i, std::size_t j) const { return m_full.q_norm[i * m_nx + j]; }
  double q_theta(std::size_t i, std::size_t j) const { return m_theta[i * m_nx + j]; }

  /// Row-major per-sample caches.
  std::span<const double> q_norm() const { return m_full.q_norm; }
  std::span<const double> q_theta() const { return m_theta; }

  /// True when the radial layout exists (square cells and equal counts).
  bool has_radial_nodes() const { return !m_radial.q_norm.empty(); }
  const QuadratureNodes& nodes(NodeLayout layout) const;

private:
  void build();

  std::size_t m_nx;
  std::size_t m_ny;
  double m_qmax;
  std::vector<double> m_theta;
  QuadratureNodes m_full;
  QuadratureNodes m_radial;
};

using GridPtr = std::shared_ptr<const FrequencyGrid>;

GridPtr make_frequency_grid(std::size_t n, double q_max);

/// Fourier-conjugate frequency grid of a real-space grid.
GridPtr conjugate_grid(const RealGrid& r);

/// Centred FFT bin for sample index i of an n-point axis: (i + n/2) mod n.
inline std::size_t fft_index(std::size_t i, std::size_t n)
{
  return (i + n / 2) % n;
}

} // namespace ctfkit
