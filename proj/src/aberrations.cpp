#include "ctfkit/aberrations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctfkit {

double electron_wavelength(double voltage_kv)
{
  if (!(voltage_kv > 0.0) || !std::isfinite(voltage_kv))
    throw std::invalid_argument("voltage must be positive");
  using namespace constants;
  const double v = voltage_kv * 1e3;
  const double ev = elementary_charge * v;
  const double mc2 = electron_mass * speed_of_light * speed_of_light;
  const double p = std::sqrt(2.0 * electron_mass * ev * (1.0 + ev / (2.0 * mc2)));
  return planck / p * 1e10;
}

bool AberrationTerm::admissible() const
{
  return m >= 1 && n >= 0 && n <= m && (m - n) % 2 == 0;
}

AberrationSet::AberrationSet(std::vector<AberrationTerm> terms)
{
  for (const auto& t : terms)
    add(t);
}

void AberrationSet::add(const AberrationTerm& term)
{
  if (!term.admissible())
    throw std::invalid_argument("inadmissible aberration order (m=" +
                                std::to_string(term.m) +
                                ", n=" + std::to_string(term.n) + ")");
  if (find(term.m, term.n))
    throw std::invalid_argument("duplicate aberration term (m=" +
                                std::to_string(term.m) +
                                ", n=" + std::to_string(term.n) + ")");
  AberrationTerm t = term;
  if (t.n == 0)
    t.c_ang = 0.0;
  m_terms.push_back(t);
}

const AberrationTerm* AberrationSet::find(int m, int n) const
{
  auto it = std::find_if(m_terms.begin(), m_terms.end(), [&](const auto& t) {
    return t.m == m && t.n == n;
  });
  return it == m_terms.end() ? nullptr : &*it;
}

bool AberrationSet::is_round() const
{
  return std::all_of(m_terms.begin(), m_terms.end(),
                     [](const auto& t) { return t.n == 0; });
}

AberrationSet AberrationSet::scaled(double s) const
{
  AberrationSet out = *this;
  for (auto& t : out.m_terms)
    t.c_mag *= s;
  return out;
}

AberrationSet AberrationSet::rotated(double phi) const
{
  AberrationSet out = *this;
  for (auto& t : out.m_terms)
    if (t.n != 0)
      t.c_ang += phi;
  return out;
}

AberrationSet AberrationSet::merge(const AberrationSet& a,
                                   const AberrationSet& b)
{
  AberrationSet out = a;
  for (const auto& t : b.m_terms)
    out.add(t);
  return out;
}

PhysicalAberrations PhysicalAberrations::scaled(double s) const
{
  PhysicalAberrations p = *this;
  p.defocus = defocus * s;
  p.astig2.magnitude = astig2.magnitude * s;
  p.coma.magnitude = coma.magnitude * s;
  p.astig3.magnitude = astig3.magnitude * s;
  p.spherical = spherical * s;
  return p;
}

AberrationSet from_physical(const PhysicalAberrations& phys, double lambda)
{
  if (!(lambda > 0.0))
    throw std::invalid_argument("wavelength must be positive");

  AberrationSet out;
  auto emit = [&](int m, int n, Length c, double angle) {
    const double a = c.in_angstrom();
    if (!std::isfinite(a) || !std::isfinite(angle))
      throw std::invalid_argument("non-finite aberration coefficient");
    if (a == 0.0)
      return;
    out.add({m, n, 2.0 * constants::pi * a / (double(m) * lambda), angle});
  };
  emit(2, 0, phys.defocus, 0.0);
  emit(2, 2, phys.astig2.magnitude, phys.astig2.angle);
  emit(3, 1, phys.coma.magnitude, phys.coma.angle);
  emit(3, 3, phys.astig3.magnitude, phys.astig3.angle);
  emit(4, 0, phys.spherical, 0.0);
  return out;
}

MicroscopeConfig::MicroscopeConfig(double voltage, Length spread,
                                   std::optional<double> aperture)
  : voltage_kv(voltage),
    lambda(electron_wavelength(voltage)),
    focal_spread(spread),
    aperture_cutoff(aperture)
{
  if (!(spread.in_angstrom() >= 0.0) || !std::isfinite(spread.in_angstrom()))
    throw std::invalid_argument("focal spread must be non-negative");
  if (aperture && (!(*aperture >= 0.0) || !std::isfinite(*aperture)))
    throw std::invalid_argument("aperture cutoff must be non-negative");
}

double chi_polar(const AberrationSet& ab, double q_norm, double q_theta,
                 double lambda)
{
  const double lq = lambda * q_norm;
  double sum = 0.0;
  for (const auto& t : ab.terms())
    sum += std::pow(lq, t.m) * t.c_mag * std::cos(t.n * (t.c_ang - q_theta));
  return sum;
}

std::vector<double> chi(const AberrationSet& ab, const FrequencyGrid& grid,
                        double lambda)
{
  const auto norm = grid.q_norm();
  const auto theta = grid.q_theta();
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = chi_polar(ab, norm[k], theta[k], lambda);
  return out;
}

ChiEvaluator::ChiEvaluator(const AberrationSet& ab, double lambda)
{
  for (const auto& t : ab.terms()) {
    if (t.c_mag == 0.0)
      continue;
    const double scale = std::pow(lambda, t.m) * t.c_mag;
    m_terms.push_back({t.m, t.n, scale * std::cos(t.n * t.c_ang),
                       scale * std::sin(t.n * t.c_ang)});
    m_max_n = std::max(m_max_n, t.n);
    m_max_m = std::max(m_max_m, t.m);
  }
  std::stable_sort(m_terms.begin(), m_terms.end(),
                   [](const Term& a, const Term& b) { return a.n < b.n; });
}

namespace {

// r^m cos(n t) = Re((q_x + i q_y)^n) (r^2)^((m - n) / 2), likewise for sin,
// so no square roots or divisions are needed.
template <typename Term>
double chi_sum(const Term* terms, std::size_t count, int max_m, int max_n,
               double q_x, double q_y, double* re, double* im, double* r2p)
{
  const double r2 = q_x * q_x + q_y * q_y;
  r2p[0] = 1.0;
  for (int k = 1; 2 * k <= max_m; ++k)
    r2p[k] = r2p[k - 1] * r2;
  re[0] = 1.0;
  im[0] = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    re[n] = re[n - 1] * q_x - im[n - 1] * q_y;
    im[n] = im[n - 1] * q_x + re[n - 1] * q_y;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const Term& t = terms[k];
    sum += r2p[(t.m - t.n) / 2] * (t.cos_coeff * re[t.n] + t.sin_coeff * im[t.n]);
  }
  return sum;
}

} // namespace

double ChiEvaluator::operator()(double q_x, double q_y) const
{
  constexpr int small = 8;
  if (m_max_m <= small) {
    double re[small + 1], im[small + 1], r2p[small / 2 + 1];
    return chi_sum(m_terms.data(), m_terms.size(), m_max_m, m_max_n, q_x, q_y,
                   re, im, r2p);
  }
  const std::size_t len = std::size_t(m_max_m) + 1;
  std::vector<double> re(len), im(len), r2p(len);
  return chi_sum(m_terms.data(), m_terms.size(), m_max_m, m_max_n, q_x, q_y,
                 re.data(), im.data(), r2p.data());
}

void ChiEvaluator::evaluate(std::span<const double> q_x,
                            std::span<const double> q_y,
                            std::span<double> out) const
{
  if (q_x.size() != out.size() || q_y.size() != out.size())
    throw std::invalid_argument("chi batch size mismatch");
  constexpr std::size_t block = 256;
  const int max_p = m_max_m / 2;
  // r2p[p * block + k] = |q_k|^(2p)
  std::vector<double> r2p(std::size_t(max_p + 1) * block);
  double re[block], im[block], acc[block];

  for (std::size_t b = 0; b < out.size(); b += block) {
    const std::size_t len = std::min(block, out.size() - b);
    const double* x = q_x.data() + b;
    const double* y = q_y.data() + b;
    for (std::size_t k = 0; k < len; ++k) {
      r2p[k] = 1.0;
      re[k] = 1.0;
      im[k] = 0.0;
      acc[k] = 0.0;
    }
    if (max_p >= 1)
      for (std::size_t k = 0; k < len; ++k)
        r2p[block + k] = x[k] * x[k] + y[k] * y[k];
    for (int p = 2; p <= max_p; ++p) {
      double* dst = r2p.data() + std::size_t(p) * block;
      const double* prev = dst - block;
      const double* one = r2p.data() + block;
      for (std::size_t k = 0; k < len; ++k)
        dst[k] = prev[k] * one[k];
    }
    // Terms are sorted by n; advance z^n = (q_x + i q_y)^n as needed.
    int n = 0;
    for (const auto& t : m_terms) {
      for (; n < t.n; ++n)
        for (std::size_t k = 0; k < len; ++k) {
          const double r = re[k] * x[k] - im[k] * y[k];
          im[k] = im[k] * x[k] + re[k] * y[k];
          re[k] = r;
        }
      const double* w = r2p.data() + std::size_t((t.m - t.n) / 2) * block;
      const double cc = t.cos_coeff;
      const double sc = t.sin_coeff;
      for (std::size_t k = 0; k < len; ++k)
        acc[k] += w[k] * (cc * re[k] + sc * im[k]);
    }
    std::copy(acc, acc + len, out.data() + b);
  }
}

} // namespace ctfkit
