#include "ctfkit/metrics.hpp"

#include "ctfkit/error.hpp"
#include "ctfkit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ctfkit {

namespace {

constexpr std::size_t chunk_size = 1 << 14;

/// sum_k multiplicity_k * f(k), reduced per fixed chunk then in chunk order.
template <class F>
double node_sum(const QuadratureNodes& nodes, F f)
{
  const std::size_t count = nodes.size();
  const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(count, chunk_size, [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    if (nodes.multiplicity.empty()) {
      for (std::size_t k = b; k < e; ++k)
        s += f(k);
    } else {
      for (std::size_t k = b; k < e; ++k)
        s += nodes.multiplicity[k] * f(k);
    }
    partial[b / chunk_size] = s;
  });
  double total = 0.0;
  for (double p : partial)
    total += p;
  return total;
}

void require_compatible(const TransferSample& a, const TransferSample& b)
{
  const auto& ga = a.grid();
  const auto& gb = b.grid();
  if (ga.n_x() != gb.n_x() || ga.n_y() != gb.n_y() ||
      ga.q_max() != gb.q_max())
    throw std::invalid_argument("transfer samples live on different grids");
  if (a.layout() != b.layout())
    throw std::invalid_argument("transfer samples use different node layouts");
}

} // namespace

SpectralWeight SpectralWeight::radial(std::vector<double> q,
                                      std::vector<double> w)
{
  if (q.size() != w.size() || q.empty())
    throw std::invalid_argument("spectral weight table needs matching, "
                                "non-empty columns");
  for (std::size_t k = 1; k < q.size(); ++k)
    if (!(q[k] > q[k - 1]))
      throw std::invalid_argument("spectral weight q must be increasing");
  SpectralWeight out;
  out.m_q = std::move(q);
  out.m_w = std::move(w);
  out.normalise();
  return out;
}

SpectralWeight SpectralWeight::field(std::size_t n_x, std::size_t n_y,
                                     std::vector<double> w)
{
  if (w.size() != n_x * n_y || w.empty())
    throw std::invalid_argument("spectral weight field has the wrong size");
  SpectralWeight out;
  out.m_is_radial = false;
  out.m_nx = n_x;
  out.m_ny = n_y;
  out.m_w = std::move(w);
  out.normalise();
  return out;
}

void SpectralWeight::normalise()
{
  double peak = 0.0;
  for (double v : m_w) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("spectral weight must be finite and >= 0");
    peak = std::max(peak, v);
  }
  if (!(peak > 0.0))
    throw std::invalid_argument("spectral weight is identically zero");
  for (double& v : m_w)
    v /= peak;
}

SpectralWeight SpectralWeight::load(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open spectral weight table " + path.string());
  std::vector<double> q, w;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a = 0.0, b = 0.0;
    if (!(ls >> a)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos)
        continue;
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected two numeric columns");
    }
    if (!(ls >> b))
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected two numeric columns");
    q.push_back(a);
    w.push_back(b);
  }
  try {
    return radial(std::move(q), std::move(w));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

double SpectralWeight::at(double q_norm) const
{
  if (!m_is_radial)
    throw std::logic_error("field weights have no radial profile");
  if (q_norm <= m_q.front())
    return m_w.front();
  if (q_norm > m_q.back())
    return 0.0;
  const auto it = std::lower_bound(m_q.begin(), m_q.end(), q_norm);
  const std::size_t hi = std::size_t(it - m_q.begin());
  const std::size_t lo = hi - 1;
  const double f = (q_norm - m_q[lo]) / (m_q[hi] - m_q[lo]);
  return m_w[lo] + f * (m_w[hi] - m_w[lo]);
}

std::vector<double> SpectralWeight::on_nodes(const FrequencyGrid& grid,
                                             NodeLayout layout) const
{
  if (!m_is_radial) {
    if (layout != NodeLayout::full)
      throw std::invalid_argument("field weights need the full node layout");
    if (grid.n_x() != m_nx || grid.n_y() != m_ny)
      throw std::invalid_argument("field weight does not match the grid");
    return m_w;
  }
  const auto& nodes = grid.nodes(layout);
  std::vector<double> out(nodes.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = at(nodes.q_norm[k]);
  return out;
}

double epsilon(const TransferSample& t, const SpectralWeight* weight)
{
  const auto& nodes = t.nodes();
  const auto& ta = t.t_abs();
  const auto& env = t.env();
  const double cell = t.grid().cell_area();

  double num = 0.0, den = 0.0;
  if (weight) {
    const auto w = weight->on_nodes(t.grid(), t.layout());
    num = node_sum(nodes, [&](std::size_t k) {
      const double v = w[k] * ta[k];
      return v * v;
    });
    den = node_sum(nodes, [&](std::size_t k) {
      const double v = w[k] * env[k];
      return v * v;
    });
  } else {
    num = node_sum(nodes, [&](std::size_t k) { return ta[k] * ta[k]; });
    den = node_sum(nodes, [&](std::size_t k) { return env[k] * env[k]; });
  }
  num *= cell;
  den *= cell;
  if (!(den > 0.0) || !std::isfinite(den))
    throw DegenerateEnvelope("envelope integral vanishes on this grid");
  return num / den;
}

double sigma(const TransferSample& train, const TransferSample& test,
             const SpectralWeight* weight, double floor)
{
  require_compatible(train, test);
  const auto& nodes = train.nodes();
  const auto& a = train.t_abs();
  const auto& b = test.t_abs();
  const double cell = train.grid().cell_area();

  double num = 0.0, den = 0.0;
  if (weight) {
    const auto w = weight->on_nodes(train.grid(), train.layout());
    num = node_sum(nodes, [&](std::size_t k) {
      const double w2 = w[k] * w[k];
      return w2 * a[k] * b[k];
    });
    den = node_sum(nodes, [&](std::size_t k) {
      const double w2 = w[k] * w[k];
      return w2 * a[k] * a[k];
    });
  } else {
    num = node_sum(nodes, [&](std::size_t k) { return a[k] * b[k]; });
    den = node_sum(nodes, [&](std::size_t k) { return a[k] * a[k]; });
  }
  num *= cell;
  den *= cell;
  if (!(den >= floor))
    throw DegenerateTraining(num, den, floor);
  return num / den;
}

double GridPolicy::resolve_q_max(const MicroscopeConfig& config) const
{
  if (q_max) {
    if (!(*q_max > 0.0))
      throw std::invalid_argument("grid q_max must be positive");
    return *q_max;
  }
  const double a = constants::pi * config.lambda *
                   config.focal_spread.in_angstrom();
  std::optional<double> cutoff;
  if (a > 0.0)
    cutoff = std::pow(2.0 * std::log(1.0 / envelope_floor) / (a * a), 0.25);
  if (config.aperture_cutoff && *config.aperture_cutoff > 0.0)
    cutoff = cutoff ? std::min(*cutoff, *config.aperture_cutoff)
                    : *config.aperture_cutoff;
  if (!cutoff)
    throw std::invalid_argument(
        "no focal spread or aperture bounds the integrand; set q_max "
        "explicitly");
  return *cutoff;
}

GridPtr GridPolicy::make_grid(const MicroscopeConfig& config) const
{
  return make_frequency_grid(resolve_n(), resolve_q_max(config));
}

GridPtr GridPolicy::make_grid(const MicroscopeConfig& a,
                              const MicroscopeConfig& b) const
{
  return make_frequency_grid(resolve_n(),
                             std::max(resolve_q_max(a), resolve_q_max(b)));
}

ShiftReport shift_report(const AberrationSet& train, const AberrationSet& test,
                         const MicroscopeConfig& config,
                         const GridPolicy& policy, const SpectralWeight* weight)
{
  return shift_report(train, config, test, config, policy, weight);
}

ShiftReport shift_report(const AberrationSet& train,
                         const MicroscopeConfig& train_config,
                         const AberrationSet& test,
                         const MicroscopeConfig& test_config,
                         const GridPolicy& policy, const SpectralWeight* weight)
{
  return shift_report_on(policy.make_grid(train_config, test_config), train,
                         train_config, test, test_config, weight);
}

ShiftReport shift_report_on(const GridPtr& grid, const AberrationSet& train,
                            const MicroscopeConfig& train_config,
                            const AberrationSet& test,
                            const MicroscopeConfig& test_config,
                            const SpectralWeight* weight)
{
  NodeLayout layout = NodeLayout::full;
  if (preferred_layout(train, *grid) == NodeLayout::radial &&
      preferred_layout(test, *grid) == NodeLayout::radial &&
      (!weight || weight->is_radial()))
    layout = NodeLayout::radial;

  const TransferSample t_train = transfer_abs(train, train_config, grid, layout);
  const TransferSample t_test = transfer_abs(test, test_config, grid, layout);

  ShiftReport r;
  r.eps_train = epsilon(t_train, weight);
  r.eps_test = epsilon(t_test, weight);
  r.sigma = sigma(t_train, t_test, weight);
  r.delta_eps = r.eps_test - r.eps_train;
  r.grid_n = grid->n_x();
  r.grid_q_max = grid->q_max();
  return r;
}

} // namespace ctfkit
