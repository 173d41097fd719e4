#include "ctfkit/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ctfkit {

namespace {

void check_axis(std::size_t n, const char* name)
{
  if (n < 8 || n % 2 != 0)
    throw std::invalid_argument(std::string("grid ") + name +
                                " must be even and >= 8, got " +
                                std::to_string(n));
}

} // namespace

RealGrid::RealGrid(std::size_t n_x, std::size_t n_y, double pixel_size)
  : m_nx(n_x), m_ny(n_y), m_pixel(pixel_size)
{
  check_axis(n_x, "n_x");
  check_axis(n_y, "n_y");
  if (!(pixel_size > 0.0) || !std::isfinite(pixel_size))
    throw std::invalid_argument("pixel size must be positive");
}

FrequencyGrid::FrequencyGrid(std::size_t n, double q_max)
  : FrequencyGrid(n, n, q_max)
{
}

FrequencyGrid::FrequencyGrid(std::size_t n_x, std::size_t n_y, double q_max)
  : m_nx(n_x), m_ny(n_y), m_qmax(q_max)
{
  check_axis(n_x, "n_x");
  check_axis(n_y, "n_y");
  if (!(q_max > 0.0) || !std::isfinite(q_max))
    throw std::invalid_argument("q_max must be positive");
  build();
}

double FrequencyGrid::q_x(std::size_t j) const
{
  return (double(j) - double(m_nx / 2)) * spacing_x();
}

double FrequencyGrid::q_y(std::size_t i) const
{
  return (double(i) - double(m_ny / 2)) * spacing_y();
}

void FrequencyGrid::build()
{
  const std::size_t n = size();
  m_theta.resize(n);
  m_full.q_norm.resize(n);
  m_full.q_x.resize(n);
  m_full.q_y.resize(n);

  for (std::size_t i = 0; i < m_ny; ++i) {
    const double qy = q_y(i);
    for (std::size_t j = 0; j < m_nx; ++j) {
      const double qx = q_x(j);
      const std::size_t k = i * m_nx + j;
      m_full.q_norm[k] = std::hypot(qx, qy);
      m_theta[k] = std::atan2(qy, qx);
      m_full.q_x[k] = qx;
      m_full.q_y[k] = qy;
    }
  }

  if (m_nx != m_ny)
    return;

  // Group samples by integer squared radius a^2 + b^2 (a, b offsets from
  // the centre). Nodes are ordered by increasing radius.
  const long half = long(m_nx / 2);
  const std::size_t max_r2 = 2 * std::size_t(half) * std::size_t(half);
  std::vector<std::size_t> counts(max_r2 + 1, 0);
  for (long a = -half; a < half; ++a)
    for (long b = -half; b < half; ++b)
      ++counts[std::size_t(a * a + b * b)];

  const double d = spacing_x();
  for (std::size_t r2 = 0; r2 <= max_r2; ++r2) {
    if (counts[r2] == 0)
      continue;
    const double q = std::sqrt(double(r2)) * d;
    m_radial.q_norm.push_back(q);
    m_radial.q_x.push_back(q);
    m_radial.q_y.push_back(0.0);
    m_radial.multiplicity.push_back(double(counts[r2]));
  }
}

const QuadratureNodes& FrequencyGrid::nodes(NodeLayout layout) const
{
  if (layout == NodeLayout::full)
    return m_full;
  if (!has_radial_nodes())
    throw std::invalid_argument("radial nodes need a square grid");
  return m_radial;
}

GridPtr make_frequency_grid(std::size_t n, double q_max)
{
  return std::make_shared<const FrequencyGrid>(n, q_max);
}

GridPtr conjugate_grid(const RealGrid& r)
{
  if (r.n_x() != r.n_y())
    return std::make_shared<const FrequencyGrid>(r.n_x(), r.n_y(), r.q_max());
  return std::make_shared<const FrequencyGrid>(r.n_x(), r.q_max());
}

} // namespace ctfkit
