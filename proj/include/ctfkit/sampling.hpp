// ctfkit/sampling.hpp
//
// Random imaging conditions: uniform target sampling up to per-aberration
// maxima, per-image Gaussian jitter around a target, and defocus/Cs pairs
// placed on the passband loci df = -sqrt(n lambda Cs).

#pragma once

#include "ctfkit/aberrations.hpp"
#include "ctfkit/random.hpp"
#include "ctfkit/units.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ctfkit {

struct SamplingSpec
{
  Length defocus_max = Length::nm(15.0);
  Length astig2_max = Length::nm(3.0);
  Length coma_max = Length::um(0.2);
  Length astig3_max = Length::um(0.2);
  Length spherical_max = Length::mm(0.1);
  /// Jitter standard deviation as a fraction of each maximum.
  double jitter_fraction = 1.0 / 8.0;
  double rotation_max = 0.125;                        ///< radians
  double rotation_jitter_std = constants::pi / 16.0;  ///< radians
  /// Scale on the maxima of the free aberrations in passband mode.
  double reduced_scale = 0.2;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on negative maxima or a jitter fraction
  /// outside [0, 1].
  void validate() const;
};

/// Magnitudes uniform in [0, max], angles of the non-round terms uniform in
/// [0, rotation_max]. Draw order: defocus, astig2, astig2 angle, coma, coma
/// angle, astig3, astig3 angle, spherical. No draws for round-term angles.
PhysicalAberrations sample_target_condition(const SamplingSpec& spec, Rng& rng);

/// Draw #index of the target stream of spec.seed.
PhysicalAberrations sample_target_condition(const SamplingSpec& spec,
                                            std::uint64_t index);

/// Gaussian jitter around target: magnitudes with std = jitter_fraction *
/// max, angles with std = rotation_jitter_std. Nothing is clamped.
PhysicalAberrations jitter_condition(const PhysicalAberrations& target,
                                     const SamplingSpec& spec, Rng& rng);

struct PassbandSpec
{
  std::vector<double> orders = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.25, 3.25};
  std::size_t points = 64;
  Length spherical_min = Length::um(0.1);
  Length spherical_cap = Length::mm(0.1);
  Length defocus_cap = Length::nm(15.0);

  void validate() const;
  /// min(spherical_cap, defocus_cap^2 / (lambda n)).
  Length spherical_max(double order, double lambda) const;
};

struct PassbandPair
{
  double order = 0.0;
  Length defocus;   ///< negative
  Length spherical; ///< positive
};

struct PassbandSet
{
  std::vector<PassbandPair> pairs;
  /// Orders whose Cs interval [spherical_min, spherical_max] is empty.
  std::vector<double> empty_orders;
};

/// For each order, `points` Cs values linearly spaced on
/// [spherical_min, spherical_max(order)], defocus = -sqrt(order lambda Cs).
PassbandSet passband_conditions(const PassbandSpec& spec, double lambda);

/// Passband pair plus the remaining aberrations sampled uniformly with their
/// maxima multiplied by spec.reduced_scale.
PhysicalAberrations sample_passband_condition(const PassbandPair& pair,
                                              const SamplingSpec& spec,
                                              Rng& rng);

/// One row of a conditions table.
struct ConditionRecord
{
  PhysicalAberrations ab;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

/// Header plus one row per condition; columns defocus_nm, astig2_nm,
/// astig2_ang, coma_um, coma_ang, astig3_um, astig3_ang, spherical_mm, seed,
/// index. Numbers use the shortest round-trip representation.
void write_conditions_csv(std::ostream& os,
                          const std::vector<ConditionRecord>& rows);

/// Inverse of write_conditions_csv; '#' comment lines are skipped.
std::vector<ConditionRecord> read_conditions_csv(std::istream& is);

} // namespace ctfkit
