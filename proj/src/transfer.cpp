#include "ctfkit/transfer.hpp"

#include "ctfkit/parallel.hpp"

#include <cmath>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>

namespace ctfkit {

namespace {

constexpr std::size_t chunk_size = 1 << 14;

double envelope_exponent(const MicroscopeConfig& config)
{
  const double a = constants::pi * config.lambda *
                   config.focal_spread.in_angstrom();
  return 0.5 * a * a;
}

struct EnvelopeEntry
{
  std::weak_ptr<const FrequencyGrid> grid;
  NodeLayout layout;
  double exponent;
  std::shared_ptr<const std::vector<double>> values;
};

/// Recently used envelopes; every condition on a grid shares one.
std::shared_ptr<const std::vector<double>>
cached_envelope(const GridPtr& grid, NodeLayout layout, double exponent)
{
  static std::mutex mutex;
  static std::deque<EnvelopeEntry> cache;
  {
    std::lock_guard lock(mutex);
    for (const auto& e : cache)
      if (e.layout == layout && e.exponent == exponent && e.grid.lock() == grid)
        return e.values;
  }
  const QuadratureNodes& nodes = grid->nodes(layout);
  auto values = std::make_shared<std::vector<double>>(nodes.size());
  parallel_for(nodes.size(), chunk_size, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const double q2 = nodes.q_norm[k] * nodes.q_norm[k];
      (*values)[k] = std::exp(-exponent * q2 * q2);
    }
  });
  std::lock_guard lock(mutex);
  cache.push_front({grid, layout, exponent, values});
  if (cache.size() > 4)
    cache.pop_back();
  return values;
}

} // namespace

double envelope_at(const MicroscopeConfig& config, double q_norm)
{
  const double q2 = q_norm * q_norm;
  return std::exp(-envelope_exponent(config) * q2 * q2);
}

double aperture_at(const MicroscopeConfig& config, double q_norm)
{
  if (!config.aperture_cutoff)
    return 1.0;
  return q_norm <= *config.aperture_cutoff ? 1.0 : 0.0;
}

std::vector<double> envelope(const MicroscopeConfig& config,
                             const FrequencyGrid& grid)
{
  const auto norm = grid.q_norm();
  std::vector<double> out(norm.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = envelope_at(config, norm[k]);
  return out;
}

std::vector<double> aperture(const MicroscopeConfig& config,
                             const FrequencyGrid& grid)
{
  const auto norm = grid.q_norm();
  std::vector<double> out(norm.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = aperture_at(config, norm[k]);
  return out;
}

TransferSample::TransferSample(GridPtr grid, NodeLayout layout,
                               std::vector<double> t_abs,
                               std::vector<double> env,
                               MicroscopeConfig config, AberrationSet ab)
  : TransferSample(std::move(grid), layout, std::move(t_abs),
                   std::make_shared<const std::vector<double>>(std::move(env)),
                   std::move(config), std::move(ab))
{
}

TransferSample::TransferSample(GridPtr grid, NodeLayout layout,
                               std::vector<double> t_abs,
                               std::shared_ptr<const std::vector<double>> env,
                               MicroscopeConfig config, AberrationSet ab)
  : m_grid(std::move(grid)),
    m_layout(layout),
    m_t_abs(std::move(t_abs)),
    m_env(std::move(env)),
    m_config(std::move(config)),
    m_ab(std::move(ab))
{
  if (!m_grid || !m_env)
    throw std::invalid_argument("transfer sample needs a grid and an envelope");
  const std::size_t n = m_grid->nodes(m_layout).size();
  if (m_t_abs.size() != n || m_env->size() != n)
    throw std::invalid_argument("transfer sample size does not match grid");
}

double TransferSample::t_abs_at(std::size_t i, std::size_t j) const
{
  if (m_layout != NodeLayout::full)
    throw std::logic_error("grid-sample access needs the full layout");
  return m_t_abs[i * m_grid->n_x() + j];
}

double TransferSample::env_at(std::size_t i, std::size_t j) const
{
  if (m_layout != NodeLayout::full)
    throw std::logic_error("grid-sample access needs the full layout");
  return (*m_env)[i * m_grid->n_x() + j];
}

TransferSample TransferSample::rescaled(double s) const
{
  TransferSample out = *this;
  for (auto& v : out.m_t_abs)
    v *= s;
  return out;
}

TransferSample transfer_abs(const AberrationSet& ab,
                            const MicroscopeConfig& config, GridPtr grid)
{
  return transfer_abs(ab, config, std::move(grid), NodeLayout::full);
}

TransferSample transfer_abs(const AberrationSet& ab,
                            const MicroscopeConfig& config, GridPtr grid,
                            NodeLayout layout)
{
  if (!grid)
    throw std::invalid_argument("null grid");
  if (layout == NodeLayout::radial && !ab.is_round())
    throw std::invalid_argument(
        "radial layout requires round aberrations (all n = 0)");

  const QuadratureNodes& nodes = grid->nodes(layout);
  const std::size_t count = nodes.size();
  std::vector<double> t(count);
  const auto env_ptr =
      cached_envelope(grid, layout, envelope_exponent(config));
  const std::vector<double>& env = *env_ptr;
  const ChiEvaluator chi_of(ab, config.lambda);

  parallel_for(count, chunk_size, [&](std::size_t b, std::size_t e) {
    const std::span<double> chi(t.data() + b, e - b);
    chi_of.evaluate(std::span(nodes.q_x).subspan(b, e - b),
                    std::span(nodes.q_y).subspan(b, e - b), chi);
    for (std::size_t k = b; k < e; ++k) {
      const double a = aperture_at(config, nodes.q_norm[k]);
      t[k] = a == 0.0 ? 0.0 : env[k] * a * std::abs(std::sin(t[k]));
    }
  });

  return TransferSample(std::move(grid), layout, std::move(t), env_ptr,
                        config, ab);
}

NodeLayout preferred_layout(const AberrationSet& ab, const FrequencyGrid& grid)
{
  return ab.is_round() && grid.has_radial_nodes() ? NodeLayout::radial
                                                  : NodeLayout::full;
}

std::vector<std::complex<double>>
complex_transfer(const AberrationSet& ab, const MicroscopeConfig& config,
                 const FrequencyGrid& grid)
{
  const QuadratureNodes& nodes = grid.nodes(NodeLayout::full);
  std::vector<std::complex<double>> h(nodes.size());
  const ChiEvaluator chi_of(ab, config.lambda);
  const double expo = envelope_exponent(config);

  parallel_for(h.size(), chunk_size, [&](std::size_t b, std::size_t e) {
    std::vector<double> chi(e - b);
    chi_of.evaluate(std::span(nodes.q_x).subspan(b, e - b),
                    std::span(nodes.q_y).subspan(b, e - b), chi);
    for (std::size_t k = b; k < e; ++k) {
      const double q = nodes.q_norm[k];
      const double amp = aperture_at(config, q) * std::exp(-expo * q * q * q * q);
      h[k] = std::polar(amp, -chi[k - b]);
    }
  });
  return h;
}

} // namespace ctfkit
