#include "ctfkit/imaging.hpp"
#include "ctfkit/transfer.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

using namespace ctfkit;
using cplx = std::complex<double>;

namespace {

const double pi = std::numbers::pi;

// sigma_e = (2 pi / (lambda V)) (m c^2 + e V) / (2 m c^2 + e V)
double interaction_oracle(double kv)
{
  const double mc2 = 510998.95; // eV
  const double v = kv * 1e3;
  const double lambda = electron_wavelength(kv);
  return 2.0 * pi / (lambda * v) * (mc2 + v) / (2.0 * mc2 + v);
}

/// Separable textbook DFT, row-major n x n. sign = -1 forward, +1 inverse
/// (inverse includes 1 / n^2).
std::vector<cplx> dft2(const std::vector<cplx>& in, std::size_t n, int sign)
{
  std::vector<cplx> tw(n);
  for (std::size_t k = 0; k < n; ++k)
    tw[k] = std::polar(1.0, sign * 2.0 * pi * double(k) / double(n));
  std::vector<cplx> tmp(n * n), out(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      cplx s = 0;
      for (std::size_t x = 0; x < n; ++x)
        s += in[r * n + x] * tw[(k * x) % n];
      tmp[r * n + k] = s;
    }
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t k = 0; k < n; ++k) {
      cplx s = 0;
      for (std::size_t y = 0; y < n; ++y)
        s += tmp[y * n + c] * tw[(k * y) % n];
      out[k * n + c] = sign > 0 ? s / double(n * n) : s;
    }
  return out;
}

double freq_of_bin(std::size_t k, std::size_t n, double px)
{
  const long s = k < n / 2 ? long(k) : long(k) - long(n);
  return double(s) / (double(n) * px);
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b)
{
  double num = 0, den = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num / den);
}

/// Random phantom rescaled so that max |sigma V| equals `peak`.
PhaseObject weak_phantom(std::size_t n, double px, double peak, std::uint64_t seed)
{
  const auto raw = random_phantom(RealGrid(n, n, px), 10, 1.0, 0.5, seed);
  double vmax = 0.0;
  for (double v : raw.v_proj)
    vmax = std::max(vmax, std::abs(v));
  auto v = raw.v_proj;
  for (double& x : v)
    x *= peak / (raw.interaction_constant * vmax);
  return PhaseObject(raw.grid, v, 300.0);
}

AberrationSet round_set(double df_nm, double cs_mm, double lambda)
{
  PhysicalAberrations p;
  p.defocus = Length::nm(df_nm);
  p.spherical = Length::mm(cs_mm);
  return from_physical(p, lambda);
}

const MicroscopeConfig tem300(300, Length::angstrom(10));

} // namespace

TEST_CASE("interaction constant")
{
  for (double kv : {60.0, 100.0, 200.0, 300.0})
    CHECK(interaction_constant(kv) ==
          doctest::Approx(interaction_oracle(kv)).epsilon(1e-7));
  CHECK(interaction_constant(300) == doctest::Approx(0.000653).epsilon(2e-3));
  CHECK(interaction_constant(100) == doctest::Approx(0.000924).epsilon(2e-3));
  double prev = interaction_constant(60);
  for (double kv = 70; kv <= 300; kv += 10) {
    CHECK(interaction_constant(kv) < prev);
    prev = interaction_constant(kv);
  }
}

TEST_CASE("vacuum and aberration-free phase objects are invisible")
{
  const RealGrid g(64, 64, 0.25);
  const PhaseObject vac(g, std::vector<double>(g.size(), 0.0), 300);
  const auto ab = round_set(-12, 0.02, tem300.lambda);
  for (double v : simulate(vac, ab, tem300).intensity)
    CHECK(std::abs(v - 1.0) < 1e-6);

  const MicroscopeConfig ideal(300, Length::angstrom(0));
  const auto obj = random_phantom(g, 20, 30.0, 0.4, 1);
  for (double v : simulate(obj, AberrationSet{}, ideal).intensity)
    CHECK(std::abs(v - 1.0) < 1e-6);
}

TEST_CASE("weak-phase linear response")
{
  const std::size_t n = 96;
  const double px = 0.25;
  const auto obj = weak_phantom(n, px, 0.05, 4);
  const double lambda = tem300.lambda;
  const auto ab = round_set(-std::sqrt(1.5 * lambda * 2.5e5) / 10.0, 0.025, lambda);

  std::vector<cplx> phase(n * n);
  for (std::size_t k = 0; k < phase.size(); ++k)
    phase[k] = obj.interaction_constant * obj.v_proj[k];
  auto spec = dft2(phase, n, -1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double qy = freq_of_bin(i, n, px), qx = freq_of_bin(j, n, px);
      const double q = std::hypot(qx, qy);
      const double c = pi * lambda * q * q * (-std::sqrt(1.5 * lambda * 2.5e5)) +
                       0.5 * pi * std::pow(lambda, 3) * std::pow(q, 4) * 2.5e5;
      const double e = std::exp(-std::pow(pi * lambda * 10.0, 2) * std::pow(q, 4) / 2);
      spec[i * n + j] *= 2.0 * std::sin(c) * e;
    }
  const auto lin = dft2(spec, n, +1);
  std::vector<double> predicted(n * n);
  for (std::size_t k = 0; k < lin.size(); ++k)
    predicted[k] = lin[k].real();

  const auto img = simulate(obj, ab, tem300).intensity;
  std::vector<double> contrast(n * n);
  for (std::size_t k = 0; k < img.size(); ++k)
    contrast[k] = img[k] - 1.0;
  CHECK(rel_l2(contrast, predicted) < 0.02);
}

TEST_CASE("contrast reversal under defocus sign flip")
{
  const auto obj = weak_phantom(128, 0.25, 0.05, 9);
  const auto a = simulate(obj, round_set(-8, 0, tem300.lambda), tem300).intensity;
  const auto b = simulate(obj, round_set(8, 0, tem300.lambda), tem300).intensity;
  std::vector<double> ca(a.size()), cb(b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ca[k] = a[k] - 1.0;
    cb[k] = -(b[k] - 1.0);
  }
  CHECK(rel_l2(ca, cb) < 0.05);
}

TEST_CASE("unitary transfer conserves intensity")
{
  const MicroscopeConfig ideal(300, Length::angstrom(0));
  PhysicalAberrations p;
  p.defocus = Length::nm(-9);
  p.astig2 = {Length::nm(3), 0.4};
  p.coma = {Length::um(0.2), 1.0};
  p.spherical = Length::mm(0.05);
  const auto obj = random_phantom(RealGrid(128, 128, 0.25), 30, 40.0, 0.4, 3);
  const auto img = simulate(obj, from_physical(p, ideal.lambda), ideal).intensity;
  double total = 0.0;
  for (double v : img)
    total += v;
  CHECK(std::abs(total / double(img.size()) - 1.0) < 1e-6);
}

TEST_CASE("translation covariance")
{
  const std::size_t n = 64;
  const auto obj = random_phantom(RealGrid(n, n, 0.25), 12, 20.0, 0.4, 5);
  std::vector<double> shifted(obj.v_proj.size());
  const std::size_t dx = 3, dy = 5;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      shifted[((i + dy) % n) * n + (j + dx) % n] = obj.v_proj[i * n + j];
  const PhaseObject moved(obj.grid, shifted, 300);
  const auto ab = round_set(-6, 0.01, tem300.lambda);
  const auto a = simulate(obj, ab, tem300).intensity;
  const auto b = simulate(moved, ab, tem300).intensity;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      CHECK(std::abs(b[((i + dy) % n) * n + (j + dx) % n] - a[i * n + j]) < 1e-12);
}

TEST_CASE("simulator checks the voltage")
{
  const auto obj = random_phantom(RealGrid(32, 32, 0.25), 3, 5.0, 0.4, 1, 200.0);
  const Simulator sim(obj);
  CHECK_THROWS_AS(sim.image(AberrationSet{}, tem300), std::invalid_argument);
  CHECK_NOTHROW(sim.image(AberrationSet{}, MicroscopeConfig(200, Length::angstrom(10))));
}

TEST_CASE("dose statistics")
{
  const RealGrid g(256, 256, 0.25);
  const PhaseObject vac(g, std::vector<double>(g.size(), 0.0), 300);
  const auto clean = simulate(vac, AberrationSet{}, tem300);
  Rng rng = Rng::substream(0, streams::dose, 0);
  const auto noisy = apply_dose(clean, 300.0, rng);
  double s = 0, s2 = 0;
  for (double v : noisy.intensity) {
    s += v;
    s2 += v * v;
  }
  const double n = double(g.size());
  const double mean = s / n;
  CHECK(std::abs(mean - 18.75) < 3.0 * std::sqrt(18.75 / n));
  CHECK((s2 / n - mean * mean) == doctest::Approx(18.75).epsilon(0.03));
  CHECK_THROWS_AS(apply_dose(noisy, 300.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(apply_dose(clean, 0.0, rng), std::invalid_argument);

  Rng big = Rng::substream(0, streams::dose, 1);
  const auto high = apply_dose(clean, 1e6, big).normalized();
  CHECK(rel_l2(high, clean.intensity) < 0.01);

  Rng r1 = Rng::substream(4, streams::dose, 0), r2 = Rng::substream(4, streams::dose, 0);
  CHECK(apply_dose(clean, 300.0, r1).intensity == apply_dose(clean, 300.0, r2).intensity);
}

TEST_CASE("phantoms")
{
  const RealGrid g(128, 128, 0.25);
  for (double v : gaussian_phantom(g, {}).v_proj)
    CHECK(v == 0.0);

  const auto one = gaussian_phantom(g, {{16.0, 16.0, 2.0, 1.0}});
  double total = 0.0;
  for (double v : one.v_proj)
    total += v;
  total *= g.pixel_area();
  CHECK(std::abs(total - 2.0 * 2.0 * pi) / (2.0 * 2.0 * pi) < 5e-3);

  const std::size_t n = 64;
  const auto lat = lattice_phantom(RealGrid(n, n, 0.25), 4.0, 3.0, 0.5);
  std::vector<cplx> v(lat.v_proj.begin(), lat.v_proj.end());
  const auto f = dft2(v, n, -1);
  double on = 0.0, off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::norm(f[i * n + j]);
      (i % 4 == 0 && j % 4 == 0 ? on : off) += p;
    }
  CHECK(off < 1e-20 * on);
  CHECK(std::norm(f[4]) > 1e-6 * on);
  CHECK_THROWS_AS(lattice_phantom(RealGrid(n, n, 0.25), 3.0, 1.0, 0.5),
                  std::invalid_argument);

  const auto r1 = random_phantom(g, 8, 2.0, 0.5, 11);
  const auto r2 = random_phantom(g, 8, 2.0, 0.5, 11);
  CHECK(r1.v_proj == r2.v_proj);
}

namespace {

double brute_force_argmin(const PhaseObject& obj, const AberrationSet& base,
                          double hw, double& best_c)
{
  const Simulator sim(obj);
  double best = 0.0;
  best_c = INFINITY;
  const long k_max = std::lround(hw / 0.1);
  for (long k = -k_max; k <= k_max; ++k) {
    const double off = 0.1 * double(k);
    const double c = sim.contrast(
        with_defocus_offset(base, Length::angstrom(off), tem300.lambda), tem300);
    if (c < best_c || (c == best_c && std::abs(off) < std::abs(best))) {
      best_c = c;
      best = off;
    }
  }
  return best;
}

} // namespace

TEST_CASE("defocus offset helper")
{
  const auto base = round_set(-5, 0.01, tem300.lambda);
  const auto moved = with_defocus_offset(base, Length::nm(2), tem300.lambda);
  const auto direct = round_set(-3, 0.01, tem300.lambda);
  CHECK(chi_polar(moved, 0.9, 0.0, tem300.lambda) ==
        doctest::Approx(chi_polar(direct, 0.9, 0.0, tem300.lambda)).epsilon(1e-12));
  const auto fresh = with_defocus_offset(AberrationSet{}, Length::nm(1), tem300.lambda);
  CHECK(fresh.find(2, 0) != nullptr);
}

TEST_CASE("minimum-contrast calibration matches a brute-force scan")
{
  const auto lat = lattice_phantom(RealGrid(64, 64, 0.25), 4.0, 2.0, 0.5);
  const double hw = 30.0;
  double bf_c = 0.0;
  const auto sym = calibrate_min_contrast(lat, AberrationSet{}, tem300, Length::angstrom(hw));
  CHECK(std::abs(sym.offset.in_angstrom()) <= 0.1);
  const double bf = brute_force_argmin(lat, AberrationSet{}, hw, bf_c);
  CHECK(std::abs(sym.offset.in_angstrom() - bf) <= 0.1);
  CHECK(sym.contrast <= bf_c);

  const auto cs = round_set(0, 0.025, tem300.lambda);
  const auto with_cs = calibrate_min_contrast(lat, cs, tem300, Length::angstrom(hw));
  const double bf_cs = brute_force_argmin(lat, cs, hw, bf_c);
  CHECK(std::abs(with_cs.offset.in_angstrom()) > 0.1);
  CHECK(std::abs(with_cs.offset.in_angstrom() - bf_cs) <= 0.1);
  CHECK(with_cs.contrast <= bf_c);

  CHECK_THROWS_AS(calibrate_min_contrast(lat, cs, tem300, Length::angstrom(0)),
                  std::invalid_argument);
}
