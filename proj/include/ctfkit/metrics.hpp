// ctfkit/metrics.hpp
//
// Information-transfer metrics over a frequency grid (midpoint Riemann sums):
//
//   epsilon(chi)       = sum |T|^2 / sum E^2
//   sigma(chi, chi')   = sum |T| |T'| / sum |T|^2       (chi = training)
//   delta_eps          = epsilon(chi') - epsilon(chi)
//
// An optional spectral weight w(q) replaces T by w T (and E by w E).

#pragma once

#include "ctfkit/aberrations.hpp"
#include "ctfkit/grid.hpp"
#include "ctfkit/transfer.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace ctfkit {

class SpectralWeight
{
public:
  /// Radial profile, linearly interpolated, zero beyond the last point and
  /// clamped to the first value below the first point. q must be strictly
  /// increasing; values must be finite and >= 0 with a positive maximum.
  static SpectralWeight radial(std::vector<double> q, std::vector<double> w);

  /// Full field on the samples of a specific grid (row-major).
  static SpectralWeight field(std::size_t n_x, std::size_t n_y,
                              std::vector<double> w);

  /// Two-column text table: q (1/Angstrom) and w. '#' starts a comment.
  static SpectralWeight load(const std::filesystem::path& path);

  bool is_radial() const { return m_is_radial; }

  /// Radial profile value; throws for field weights.
  double at(double q_norm) const;

  /// Weight on each quadrature node of a transfer sample's layout.
  std::vector<double> on_nodes(const FrequencyGrid& grid,
                               NodeLayout layout) const;

private:
  SpectralWeight() = default;
  void normalise();

  bool m_is_radial = true;
  std::vector<double> m_q;
  std::vector<double> m_w;
  std::size_t m_nx = 0;
  std::size_t m_ny = 0;
};

/// Fraction of envelope-limited information transferred, in [0, 1].
double epsilon(const TransferSample& t,
               const SpectralWeight* weight = nullptr);

inline constexpr double default_sigma_floor = 1e-12;

/// Asymmetric overlap; the first argument is the training condition.
/// Throws DegenerateTraining when sum |T_train|^2 dq < floor.
double sigma(const TransferSample& train, const TransferSample& test,
             const SpectralWeight* weight = nullptr,
             double floor = default_sigma_floor);

/// How to pick the integration grid when none is given explicitly.
struct GridPolicy
{
  std::optional<std::size_t> n;   ///< default 1024
  std::optional<double> q_max;    ///< default from the envelope

  static constexpr std::size_t default_n = 1024;
  /// Envelope value at the automatic q_max (so E^2 is far below it).
  static constexpr double envelope_floor = 1e-8;

  /// q_max with E(q_max) = envelope_floor, capped by the aperture.
  /// Throws std::invalid_argument when neither a focal spread nor an
  /// aperture bounds the integrand and no explicit q_max is set.
  double resolve_q_max(const MicroscopeConfig& config) const;
  std::size_t resolve_n() const { return n.value_or(default_n); }

  GridPtr make_grid(const MicroscopeConfig& config) const;
  /// Grid covering both configurations (largest q_max).
  GridPtr make_grid(const MicroscopeConfig& a, const MicroscopeConfig& b) const;
};

struct ShiftReport
{
  double eps_train = 0.0;
  double eps_test = 0.0;
  double sigma = 0.0;
  double delta_eps = 0.0;
  std::size_t grid_n = 0;
  double grid_q_max = 0.0;
};

ShiftReport shift_report(const AberrationSet& train, const AberrationSet& test,
                         const MicroscopeConfig& config,
                         const GridPolicy& policy = {},
                         const SpectralWeight* weight = nullptr);

/// Conditions with their own envelopes (e.g. different focal spreads).
ShiftReport shift_report(const AberrationSet& train,
                         const MicroscopeConfig& train_config,
                         const AberrationSet& test,
                         const MicroscopeConfig& test_config,
                         const GridPolicy& policy = {},
                         const SpectralWeight* weight = nullptr);

/// Same as above on a caller-supplied grid.
ShiftReport shift_report_on(const GridPtr& grid, const AberrationSet& train,
                            const MicroscopeConfig& train_config,
                            const AberrationSet& test,
                            const MicroscopeConfig& test_config,
                            const SpectralWeight* weight = nullptr);

} // namespace ctfkit
