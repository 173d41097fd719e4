#include "ctfkit/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace ctfkit;

TEST_CASE("small grid sample positions")
{
  const FrequencyGrid g(8, 1.0);
  CHECK(g.q_norm(4, 4) == 0.0);
  CHECK(g.q_norm(4, 6) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.q_theta(4, 6) == 0.0);
  CHECK(g.q_theta(6, 4) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  CHECK(g.q_x(0) == -1.0);
  CHECK(g.q_y(7) == doctest::Approx(0.75));
  CHECK(g.cell_area() == doctest::Approx(0.0625));
}

TEST_CASE("conjugate grid uses the Nyquist frequency")
{
  CHECK(conjugate_grid(RealGrid(256, 256, 0.25))->q_max() == 2.0);
  CHECK(conjugate_grid(RealGrid(512, 512, 0.1))->q_max() == doctest::Approx(5.0));
  CHECK(conjugate_grid(RealGrid(128, 128, 1.0))->q_max() == 0.5);
}

TEST_CASE("grid rejects odd or tiny sizes")
{
  CHECK_THROWS_AS(FrequencyGrid(7, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FrequencyGrid(6, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(FrequencyGrid(8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RealGrid(9, 8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RealGrid(8, 8, -1.0), std::invalid_argument);
}

TEST_CASE("norm and angle caches are consistent")
{
  const FrequencyGrid g(16, 20, 1.7);
  for (std::size_t i = 0; i < g.n_y(); ++i)
    for (std::size_t j = 0; j < g.n_x(); ++j) {
      const double qx = g.q_x(j), qy = g.q_y(i);
      CHECK(std::abs(g.q_norm(i, j) * g.q_norm(i, j) - (qx * qx + qy * qy)) <=
            1e-14 * (1.0 + qx * qx + qy * qy));
      CHECK(g.q_theta(i, j) == std::atan2(qy, qx));
    }
  CHECK(g.cell_area() > 0.0);
  CHECK_FALSE(g.has_radial_nodes());
}

TEST_CASE("angle is odd under q_y reflection")
{
  const FrequencyGrid g(16, 1.0);
  for (std::size_t i = 1; i < g.n_y(); ++i)
    for (std::size_t j = 0; j < g.n_x(); ++j) {
      const std::size_t mirror = g.n_y() - i;
      if (g.q_y(i) == 0.0 || (g.q_x(j) < 0.0 && g.q_y(i) == 0.0))
        continue;
      CHECK(g.q_theta(i, j) + g.q_theta(mirror, j) == doctest::Approx(0.0));
    }
}

TEST_CASE("Gaussian integral converges under midpoint quadrature")
{
  const double s = 0.2;
  const FrequencyGrid g(256, 5.0 * s);
  double sum = 0.0;
  for (double q : g.q_norm())
    sum += std::exp(-q * q / (2.0 * s * s));
  sum *= g.cell_area();
  const double exact = 2.0 * std::numbers::pi * s * s;
  CHECK(std::abs(sum - exact) / exact < 1e-3);
}

TEST_CASE("radial nodes reproduce the full sum")
{
  const FrequencyGrid g(64, 1.3);
  REQUIRE(g.has_radial_nodes());
  const auto& full = g.nodes(NodeLayout::full);
  const auto& radial = g.nodes(NodeLayout::radial);
  CHECK(full.size() == g.size());
  double count = 0.0;
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < full.size(); ++k)
    a += std::cos(3.0 * full.q_norm[k]) * full.weight(k);
  for (std::size_t k = 0; k < radial.size(); ++k) {
    count += radial.weight(k);
    b += std::cos(3.0 * radial.q_norm[k]) * radial.weight(k);
    CHECK(radial.q_y[k] == 0.0);
    CHECK(radial.q_x[k] == radial.q_norm[k]);
    if (k > 0)
      CHECK(radial.q_norm[k] > radial.q_norm[k - 1]);
  }
  CHECK(count == double(g.size()));
  CHECK(b == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("centred FFT index")
{
  CHECK(fft_index(4, 8) == 0);
  CHECK(fft_index(0, 8) == 4);
  CHECK(fft_index(7, 8) == 3);
}
