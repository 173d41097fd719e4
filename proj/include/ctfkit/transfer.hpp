// ctfkit/transfer.hpp
//
// Chromatic damping envelope, aperture and the intensity transfer function.
// For the metrics the constant factor 2 of T = 2 E A sin(chi) is dropped, so
// the stored |T| = E A |sin chi| never exceeds E.

#pragma once

#include "ctfkit/aberrations.hpp"
#include "ctfkit/grid.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace ctfkit {

/// E(q) = exp(-(pi lambda delta)^2 |q|^4 / 2) at a single frequency.
double envelope_at(const MicroscopeConfig& config, double q_norm);

/// 1 inside the aperture (or with no aperture), else 0.
double aperture_at(const MicroscopeConfig& config, double q_norm);

std::vector<double> envelope(const MicroscopeConfig& config,
                             const FrequencyGrid& grid);
std::vector<double> aperture(const MicroscopeConfig& config,
                             const FrequencyGrid& grid);

/// |T| and E sampled on the quadrature nodes of a grid.
class TransferSample
{
public:
  TransferSample(GridPtr grid, NodeLayout layout, std::vector<double> t_abs,
                 std::vector<double> env, MicroscopeConfig config,
                 AberrationSet ab);
  /// Envelope shared between samples on the same grid.
  TransferSample(GridPtr grid, NodeLayout layout, std::vector<double> t_abs,
                 std::shared_ptr<const std::vector<double>> env,
                 MicroscopeConfig config, AberrationSet ab);

  const FrequencyGrid& grid() const { return *m_grid; }
  const GridPtr& grid_ptr() const { return m_grid; }
  NodeLayout layout() const { return m_layout; }
  const QuadratureNodes& nodes() const { return m_grid->nodes(m_layout); }

  /// Per-node values; for the full layout these are row-major grid samples.
  const std::vector<double>& t_abs() const { return m_t_abs; }
  const std::vector<double>& env() const { return *m_env; }

  /// Grid-sample access, full layout only.
  double t_abs_at(std::size_t i, std::size_t j) const;
  double env_at(std::size_t i, std::size_t j) const;

  const MicroscopeConfig& config() const { return m_config; }
  const AberrationSet& aberrations() const { return m_ab; }

  /// Same values multiplied by s (used for scale-invariance checks).
  TransferSample rescaled(double s) const;

private:
  GridPtr m_grid;
  NodeLayout m_layout;
  std::vector<double> m_t_abs;
  std::shared_ptr<const std::vector<double>> m_env;
  MicroscopeConfig m_config;
  AberrationSet m_ab;
};

/// |T| on every grid sample.
TransferSample transfer_abs(const AberrationSet& ab,
                            const MicroscopeConfig& config, GridPtr grid);

/// |T| on the requested node layout. The radial layout is only valid for a
/// round aberration set and throws std::invalid_argument otherwise.
TransferSample transfer_abs(const AberrationSet& ab,
                            const MicroscopeConfig& config, GridPtr grid,
                            NodeLayout layout);

/// Radial layout when the set is round and the grid supports it.
NodeLayout preferred_layout(const AberrationSet& ab, const FrequencyGrid& grid);

/// H(q) = A(q) E(q) exp(-i chi(q)) on every grid sample, row-major.
std::vector<std::complex<double>>
complex_transfer(const AberrationSet& ab, const MicroscopeConfig& config,
                 const FrequencyGrid& grid);

} // namespace ctfkit
