#include "ctfkit/aberrations.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace ctfkit;

namespace {

// lambda = h c / sqrt(eV (2 m c^2 + eV)), CODATA 2018.
double wavelength_oracle(double kv)
{
  const double h = 6.62607015e-34, m = 9.1093837015e-31, e = 1.602176634e-19,
               c = 299792458.0;
  const double ev = e * kv * 1e3;
  return h * c / std::sqrt(ev * (2.0 * m * c * c + ev)) * 1e10;
}

} // namespace

TEST_CASE("relativistic wavelength")
{
  for (double kv : {60.0, 100.0, 200.0, 300.0})
    CHECK(electron_wavelength(kv) ==
          doctest::Approx(wavelength_oracle(kv)).epsilon(1e-12));
  CHECK(electron_wavelength(300) == doctest::Approx(0.01969).epsilon(1e-3));
  CHECK(electron_wavelength(100) == doctest::Approx(0.03701).epsilon(1e-3));
  CHECK(electron_wavelength(200) == doctest::Approx(0.02508).epsilon(1e-3));
  CHECK_THROWS(electron_wavelength(0.0));
}

TEST_CASE("defocus and spherical terms")
{
  const double lambda = 0.01969;
  PhysicalAberrations p;
  p.defocus = Length::angstrom(100.0);
  const auto df = from_physical(p, lambda);
  const double expect = std::numbers::pi * lambda * 0.25 * 100.0;
  CHECK(chi_polar(df, 0.5, 0.3, lambda) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(expect == doctest::Approx(1.546).epsilon(1e-3));

  PhysicalAberrations s;
  s.spherical = Length::mm(0.025);
  const auto cs = from_physical(s, lambda);
  for (double q : {0.1, 0.7, 1.9}) {
    const double closed =
        std::numbers::pi / 2 * std::pow(lambda, 3) * std::pow(q, 4) * 2.5e5;
    CHECK(chi_polar(cs, q, 1.0, lambda) == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("zero and empty sets give zero phase")
{
  const auto ab = from_physical(PhysicalAberrations{}, 0.02);
  CHECK(ab.empty());
  const FrequencyGrid g(16, 2.0);
  for (double x : chi(ab, g, 0.02))
    CHECK(x == 0.0);
  CHECK(ChiEvaluator(ab, 0.02)(0.3, 0.4) == 0.0);
}

TEST_CASE("term admissibility")
{
  AberrationSet ab;
  CHECK_THROWS_AS(ab.add({2, 1, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ab.add({2, 4, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ab.add({0, 0, 1.0, 0.0}), std::invalid_argument);
  ab.add({2, 0, 1.0, 0.7});
  CHECK(ab.find(2, 0)->c_ang == 0.0);
  CHECK_THROWS_AS(ab.add({2, 0, 2.0, 0.0}), std::invalid_argument);
  CHECK(ab.is_round());
  ab.add({3, 1, 1.0, 0.2});
  CHECK_FALSE(ab.is_round());
}

TEST_CASE("two-fold astigmatism flips sign under a quarter turn")
{
  const AberrationSet ab({{2, 2, 3.0, 0.4}});
  for (double th : {0.0, 0.3, 1.1, 2.5})
    CHECK(chi_polar(ab, 0.8, th + std::numbers::pi / 2, 0.02) ==
          doctest::Approx(-chi_polar(ab, 0.8, th, 0.02)).epsilon(1e-12));
}

TEST_CASE("phase is linear in disjoint term sets")
{
  const double lambda = electron_wavelength(300);
  PhysicalAberrations a, b;
  a.defocus = Length::angstrom(100);
  b.spherical = Length::mm(0.025);
  PhysicalAberrations both = a;
  both.spherical = b.spherical;
  const auto aa = from_physical(a, lambda), bb = from_physical(b, lambda);
  const FrequencyGrid g(32, 2.5);
  const auto ca = chi(aa, g, lambda), cb = chi(bb, g, lambda);
  const auto cab = chi(from_physical(both, lambda), g, lambda);
  const auto merged = chi(AberrationSet::merge(aa, bb), g, lambda);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(cab[k] == ca[k] + cb[k]);
    CHECK(merged[k] == ca[k] + cb[k]);
  }
  CHECK_THROWS_AS(AberrationSet::merge(aa, aa), std::invalid_argument);
}

namespace {

AberrationSet random_set(std::mt19937_64& gen)
{
  std::uniform_real_distribution<double> mag(-50.0, 50.0), ang(-4.0, 4.0);
  AberrationSet ab;
  for (int m = 1; m <= 5; ++m)
    for (int n = m % 2; n <= m; n += 2)
      ab.add({m, n, mag(gen), ang(gen)});
  return ab;
}

} // namespace

TEST_CASE("rotation covariance and negation")
{
  std::mt19937_64 gen(3);
  const double lambda = 0.025;
  for (int trial = 0; trial < 20; ++trial) {
    const auto ab = random_set(gen);
    const double phi = 0.37 * trial - 2.0;
    const auto rot = ab.rotated(phi);
    const auto neg = ab.scaled(-1.0);
    for (double th : {-2.9, -0.4, 0.0, 1.3, 3.0})
      for (double q : {0.2, 1.0, 3.1}) {
        const double base = chi_polar(ab, q, th - phi, lambda);
        CHECK(chi_polar(rot, q, th, lambda) == doctest::Approx(base).epsilon(1e-9));
        CHECK(chi_polar(neg, q, th, lambda) == -chi_polar(ab, q, th, lambda));
      }
  }
}

TEST_CASE("expanded form agrees with the polar form")
{
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  const double lambda = 0.0197;
  for (int trial = 0; trial < 50; ++trial) {
    const auto ab = random_set(gen);
    const ChiEvaluator eval(ab, lambda);
    for (int s = 0; s < 40; ++s) {
      const double qx = coord(gen), qy = coord(gen);
      const double q = std::hypot(qx, qy), th = std::atan2(qy, qx);
      double scale = 0.0;
      for (const auto& t : ab.terms())
        scale += std::abs(t.c_mag) * std::pow(lambda * q, t.m);
      CHECK(std::abs(eval(qx, qy) - chi_polar(ab, q, th, lambda)) <=
            1e-12 * scale);
    }
  }
}

TEST_CASE("grid evaluation matches point evaluation")
{
  std::mt19937_64 gen(5);
  const auto ab = random_set(gen);
  const FrequencyGrid g(16, 2.0);
  const auto c = chi(ab, g, 0.02);
  for (std::size_t i = 0; i < g.n_y(); ++i)
    for (std::size_t j = 0; j < g.n_x(); ++j)
      CHECK(c[i * 16 + j] == chi_polar(ab, g.q_norm(i, j), g.q_theta(i, j), 0.02));
}

TEST_CASE("microscope configuration validation")
{
  CHECK_THROWS(MicroscopeConfig(300, Length::angstrom(-1)));
  CHECK_THROWS(MicroscopeConfig(300, Length::angstrom(10), -1.0));
  const MicroscopeConfig c(200, Length::angstrom(10));
  CHECK(c.lambda == electron_wavelength(200));
}
