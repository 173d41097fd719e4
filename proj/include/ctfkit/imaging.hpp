// ctfkit/imaging.hpp
//
// Phase-object image formation:
//
//   psi_f(q) = F[exp(i sigma_e V(r))] H(q),   I(r) = |F^-1[psi_f]|^2
//
// with a unit-amplitude incident plane wave, so vacuum images to I = 1.
// The discrete transform implies periodic boundaries; phantoms must decay or
// tile within the box.

#pragma once

#include "ctfkit/aberrations.hpp"
#include "ctfkit/fft.hpp"
#include "ctfkit/grid.hpp"
#include "ctfkit/random.hpp"
#include "ctfkit/units.hpp"

#include <complex>
#include <memory>
#include <optional>
#include <vector>

namespace ctfkit {

/// Relativistic interaction constant in rad / (V Angstrom).
double interaction_constant(double voltage_kv);

struct PhaseObject
{
  PhaseObject(RealGrid grid, std::vector<double> v_proj, double voltage_kv);

  RealGrid grid;
  std::vector<double> v_proj; ///< projected potential, V Angstrom, row-major
  double voltage_kv;
  double interaction_constant; ///< rad / (V Angstrom)
};

struct Micrograph
{
  RealGrid grid;
  /// Normalised intensity when dose is absent, electron counts otherwise.
  std::vector<double> intensity;
  std::optional<double> dose; ///< electrons / Angstrom^2
  AberrationSet aberrations;
  MicroscopeConfig config;

  /// Intensity in units of the incident flux (counts / expected vacuum
  /// counts when a dose was applied).
  std::vector<double> normalized() const;
};

/// Reusable forward model: the object spectrum is computed once and each
/// imaging condition costs one H evaluation plus one inverse transform.
class Simulator
{
public:
  explicit Simulator(const PhaseObject& object);

  const PhaseObject& object() const { return m_object; }

  /// Throws std::invalid_argument if the config voltage differs from the
  /// object's.
  Micrograph image(const AberrationSet& ab, const MicroscopeConfig& config) const;
  /// Standard deviation of the noiseless intensity.
  double contrast(const AberrationSet& ab, const MicroscopeConfig& config) const;

private:
  std::vector<double> intensity(const AberrationSet& ab,
                                const MicroscopeConfig& config) const;

  PhaseObject m_object;
  GridPtr m_freq;
  std::vector<std::complex<double>> m_spectrum; ///< FFT order
  std::unique_ptr<Fft2D> m_fft;
};

Micrograph simulate(const PhaseObject& object, const AberrationSet& ab,
                    const MicroscopeConfig& config);

/// Poisson counts with mean dose * pixel_area * normalised intensity.
/// Throws std::invalid_argument for dose <= 0 or an already-dosed image.
Micrograph apply_dose(const Micrograph& m, double dose, Rng& rng);

struct GaussianBlob
{
  double x = 0.0;         ///< Angstrom, from the grid origin (pixel 0)
  double y = 0.0;         ///< Angstrom
  double amplitude = 0.0; ///< peak projected potential, V Angstrom
  double width = 1.0;     ///< standard deviation, Angstrom
};

/// Sum of periodic (minimum-image) 2D Gaussians; each blob integrates to
/// amplitude * 2 pi width^2.
PhaseObject gaussian_phantom(const RealGrid& grid,
                             const std::vector<GaussianBlob>& blobs,
                             double voltage_kv = 300.0);

/// Square lattice of identical columns at multiples of `period`, including
/// the origin, so the object is centrosymmetric. The box must hold a whole
/// number of periods.
PhaseObject lattice_phantom(const RealGrid& grid, double period,
                            double amplitude, double width,
                            double voltage_kv = 300.0);

/// `count` blobs at uniformly random positions with peak amplitudes uniform
/// in [amplitude/2, amplitude].
PhaseObject random_phantom(const RealGrid& grid, std::size_t count,
                           double amplitude, double width, std::uint64_t seed,
                           double voltage_kv = 300.0);

/// `ab` with `offset` added to its defocus term.
AberrationSet with_defocus_offset(const AberrationSet& ab, Length offset,
                                  double lambda);

struct CalibrationResult
{
  Length offset;          ///< defocus offset at minimum contrast
  double contrast = 0.0;  ///< contrast at that offset
  Length coarse_offset;   ///< stage-1 winner
};

struct CalibrationOptions
{
  std::size_t coarse_points = 64;
  Length fine_step = Length::angstrom(0.1);
};

/// Two-stage grid search for the defocus offset of minimum contrast. Stage 1
/// scans `coarse_points` offsets evenly across [-half_width, +half_width];
/// stage 2 scans multiples of fine_step within one coarse step either side of
/// the stage-1 winner. Ties go to the smaller |offset|.
CalibrationResult calibrate_min_contrast(const PhaseObject& object,
                                         const AberrationSet& base,
                                         const MicroscopeConfig& config,
                                         Length half_width,
                                         const CalibrationOptions& options = {});

} // namespace ctfkit
