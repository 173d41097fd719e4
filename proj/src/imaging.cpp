#include "ctfkit/imaging.hpp"

#include "ctfkit/error.hpp"
#include "ctfkit/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctfkit {

double interaction_constant(double voltage_kv)
{
  using namespace constants;
  const double lambda_m = electron_wavelength(voltage_kv) * 1e-10;
  const double v = voltage_kv * 1e3;
  const double mass = electron_mass *
                      (1.0 + elementary_charge * v /
                                 (electron_mass * speed_of_light * speed_of_light));
  // rad / (V m) -> rad / (V Angstrom)
  return 2.0 * pi * mass * elementary_charge * lambda_m / (planck * planck) *
         1e-10;
}

PhaseObject::PhaseObject(RealGrid g, std::vector<double> v, double kv)
  : grid(g),
    v_proj(std::move(v)),
    voltage_kv(kv),
    interaction_constant(ctfkit::interaction_constant(kv))
{
  if (v_proj.size() != grid.size())
    throw std::invalid_argument("potential size does not match the grid");
  for (double x : v_proj)
    if (!std::isfinite(x))
      throw std::invalid_argument("potential must be finite");
}

std::vector<double> Micrograph::normalized() const
{
  if (!dose)
    return intensity;
  const double expected = *dose * grid.pixel_area();
  std::vector<double> out(intensity.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = intensity[k] / expected;
  return out;
}

Simulator::Simulator(const PhaseObject& object)
  : m_object(object),
    m_freq(conjugate_grid(object.grid)),
    m_fft(std::make_unique<Fft2D>(object.grid.n_x(), object.grid.n_y()))
{
  m_spectrum.resize(object.grid.size());
  for (std::size_t k = 0; k < m_spectrum.size(); ++k)
    m_spectrum[k] = std::polar(1.0, object.interaction_constant * object.v_proj[k]);
  m_fft->forward(m_spectrum);
}

std::vector<double> Simulator::intensity(const AberrationSet& ab,
                                         const MicroscopeConfig& config) const
{
  if (std::abs(config.voltage_kv - m_object.voltage_kv) > 1e-9)
    throw std::invalid_argument(
        "microscope voltage differs from the phase object's voltage");

  const std::size_t nx = m_object.grid.n_x();
  const std::size_t ny = m_object.grid.n_y();
  const auto h = complex_transfer(ab, config, *m_freq);

  std::vector<std::complex<double>> wave(m_spectrum.size());
  for (std::size_t i = 0; i < ny; ++i) {
    const std::size_t fi = fft_index(i, ny);
    for (std::size_t j = 0; j < nx; ++j) {
      const std::size_t f = fi * nx + fft_index(j, nx);
      wave[f] = m_spectrum[f] * h[i * nx + j];
    }
  }
  m_fft->inverse(wave);

  std::vector<double> out(wave.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::norm(wave[k]);
    if (!std::isfinite(out[k]))
      throw NumericError("non-finite intensity in simulation");
  }
  return out;
}

Micrograph Simulator::image(const AberrationSet& ab,
                            const MicroscopeConfig& config) const
{
  return Micrograph{m_object.grid, intensity(ab, config), std::nullopt, ab,
                    config};
}

double Simulator::contrast(const AberrationSet& ab,
                           const MicroscopeConfig& config) const
{
  const auto img = intensity(ab, config);
  double mean = 0.0;
  for (double v : img)
    mean += v;
  mean /= double(img.size());
  double var = 0.0;
  for (double v : img)
    var += (v - mean) * (v - mean);
  const double c = std::sqrt(var / double(img.size()));
  if (!std::isfinite(c))
    throw NumericError("non-finite contrast");
  return c;
}

Micrograph simulate(const PhaseObject& object, const AberrationSet& ab,
                    const MicroscopeConfig& config)
{
  return Simulator(object).image(ab, config);
}

Micrograph apply_dose(const Micrograph& m, double dose, Rng& rng)
{
  if (!(dose > 0.0) || !std::isfinite(dose))
    throw std::invalid_argument("dose must be positive");
  if (m.dose)
    throw std::invalid_argument("micrograph already has dose noise applied");
  Micrograph out = m;
  out.dose = dose;
  const double scale = dose * m.grid.pixel_area();
  for (auto& v : out.intensity)
    v = double(rng.poisson(std::max(0.0, v) * scale));
  return out;
}

namespace {

double wrap_delta(double d, double box)
{
  d = std::fmod(d, box);
  if (d > 0.5 * box)
    d -= box;
  else if (d < -0.5 * box)
    d += box;
  return d;
}

} // namespace

PhaseObject gaussian_phantom(const RealGrid& grid,
                             const std::vector<GaussianBlob>& blobs,
                             double voltage_kv)
{
  for (const auto& b : blobs)
    if (!(b.width > 0.0))
      throw std::invalid_argument("blob width must be positive");

  const double px = grid.pixel_size();
  const double lx = px * double(grid.n_x());
  const double ly = px * double(grid.n_y());
  std::vector<double> v(grid.size(), 0.0);
  for (const auto& b : blobs) {
    const double inv = 1.0 / (2.0 * b.width * b.width);
    for (std::size_t i = 0; i < grid.n_y(); ++i) {
      const double dy = wrap_delta(double(i) * px - b.y, ly);
      for (std::size_t j = 0; j < grid.n_x(); ++j) {
        const double dx = wrap_delta(double(j) * px - b.x, lx);
        v[i * grid.n_x() + j] += b.amplitude * std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
  return PhaseObject(grid, std::move(v), voltage_kv);
}

PhaseObject lattice_phantom(const RealGrid& grid, double period,
                            double amplitude, double width, double voltage_kv)
{
  if (!(period > 0.0))
    throw std::invalid_argument("lattice period must be positive");
  const double lx = grid.pixel_size() * double(grid.n_x());
  const double ly = grid.pixel_size() * double(grid.n_y());
  const double cx = lx / period;
  const double cy = ly / period;
  if (std::abs(cx - std::round(cx)) > 1e-9 || std::abs(cy - std::round(cy)) > 1e-9)
    throw std::invalid_argument("box must hold a whole number of lattice periods");

  std::vector<GaussianBlob> blobs;
  for (long a = 0; a < std::lround(cy); ++a)
    for (long b = 0; b < std::lround(cx); ++b)
      blobs.push_back({double(b) * period, double(a) * period, amplitude, width});
  return gaussian_phantom(grid, blobs, voltage_kv);
}

PhaseObject random_phantom(const RealGrid& grid, std::size_t count,
                           double amplitude, double width, std::uint64_t seed,
                           double voltage_kv)
{
  Rng rng = Rng::substream(seed, streams::phantom, 0);
  const double lx = grid.pixel_size() * double(grid.n_x());
  const double ly = grid.pixel_size() * double(grid.n_y());
  std::vector<GaussianBlob> blobs(count);
  for (auto& b : blobs) {
    b.x = rng.uniform(0.0, lx);
    b.y = rng.uniform(0.0, ly);
    b.amplitude = amplitude * rng.uniform(0.5, 1.0);
    b.width = width;
  }
  return gaussian_phantom(grid, blobs, voltage_kv);
}

AberrationSet with_defocus_offset(const AberrationSet& ab, Length offset,
                                  double lambda)
{
  const double extra = 2.0 * constants::pi * offset.in_angstrom() / (2.0 * lambda);
  AberrationSet out;
  bool merged = false;
  for (AberrationTerm t : ab.terms()) {
    if (t.m == 2 && t.n == 0) {
      t.c_mag += extra;
      merged = true;
    }
    out.add(t);
  }
  if (!merged && extra != 0.0)
    out.add({2, 0, extra, 0.0});
  return out;
}

CalibrationResult calibrate_min_contrast(const PhaseObject& object,
                                         const AberrationSet& base,
                                         const MicroscopeConfig& config,
                                         Length half_width,
                                         const CalibrationOptions& options)
{
  const double hw = half_width.in_angstrom();
  const double step = options.fine_step.in_angstrom();
  if (!(hw > 0.0))
    throw std::invalid_argument("search half width must be positive");
  if (!(step > 0.0) || options.coarse_points < 2)
    throw std::invalid_argument("invalid calibration options");

  const Simulator sim(object);
  auto contrast_at = [&](double off) {
    return sim.contrast(with_defocus_offset(base, Length::angstrom(off),
                                            config.lambda),
                        config);
  };
  auto better = [](double c, double off, double best_c, double best_off) {
    if (c != best_c)
      return c < best_c;
    if (std::abs(off) != std::abs(best_off))
      return std::abs(off) < std::abs(best_off);
    return off < best_off;
  };

  const double coarse_step = 2.0 * hw / double(options.coarse_points - 1);
  double best_off = 0.0;
  double best_c = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < options.coarse_points; ++k) {
    const double off = -hw + coarse_step * double(k);
    const double c = contrast_at(off);
    if (better(c, off, best_c, best_off)) {
      best_c = c;
      best_off = off;
    }
  }
  const double coarse = best_off;

  // Fine stage on the absolute lattice k * step.
  const long k_lo = long(std::ceil(std::max(-hw, coarse - coarse_step) / step - 1e-9));
  const long k_hi = long(std::floor(std::min(hw, coarse + coarse_step) / step + 1e-9));
  double fine_off = 0.0;
  double fine_c = std::numeric_limits<double>::infinity();
  for (long k = k_lo; k <= k_hi; ++k) {
    const double off = double(k) * step;
    const double c = contrast_at(off);
    if (better(c, off, fine_c, fine_off)) {
      fine_c = c;
      fine_off = off;
    }
  }

  return {Length::angstrom(fine_off), fine_c, Length::angstrom(coarse)};
}

} // namespace ctfkit
