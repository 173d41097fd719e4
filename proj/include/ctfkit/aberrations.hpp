// ctfkit/aberrations.hpp
//
// Axial lens aberrations and the aberration phase shift
//
//   chi(q) = sum_{m,n} (lambda |q|)^m  C_mag  cos(n (C_ang - q_theta))
//
// C_mag is dimensionless. Physical coefficients (defocus, Cs, ...) are mapped
// to it via C_mag = 2 pi C_phys / (m lambda), which yields the familiar
// pi lambda q^2 df + (pi/2) lambda^3 q^4 Cs for the round terms.

#pragma once

#include "ctfkit/grid.hpp"
#include "ctfkit/units.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ctfkit {

/// Relativistic electron wavelength in Angstrom for an accelerating voltage
/// given in kV.
double electron_wavelength(double voltage_kv);

struct AberrationTerm
{
  int m = 0;          ///< radial order
  int n = 0;          ///< azimuthal order
  double c_mag = 0.0; ///< dimensionless magnitude
  double c_ang = 0.0; ///< azimuthal phase, radians (ignored for n = 0)

  /// n <= m, m >= 1, n >= 0 and (m - n) even.
  bool admissible() const;
};

class AberrationSet
{
public:
  AberrationSet() = default;
  explicit AberrationSet(std::vector<AberrationTerm> terms);

  /// Throws std::invalid_argument on a duplicate (m, n) or an inadmissible
  /// term.
  void add(const AberrationTerm& term);

  std::span<const AberrationTerm> terms() const { return m_terms; }
  bool empty() const { return m_terms.empty(); }
  const AberrationTerm* find(int m, int n) const;

  /// Every term has n = 0, i.e. chi depends on |q| only.
  bool is_round() const;

  /// All magnitudes multiplied by s.
  AberrationSet scaled(double s) const;
  /// Every angle increased by phi.
  AberrationSet rotated(double phi) const;

  /// Union of two sets with disjoint (m, n).
  static AberrationSet merge(const AberrationSet& a, const AberrationSet& b);

private:
  std::vector<AberrationTerm> m_terms;
};

/// A magnitude/angle pair for non-round aberrations.
struct PolarLength
{
  Length magnitude;
  double angle = 0.0; ///< radians

  bool operator==(const PolarLength&) const = default;
};

/// The aberrations that can be sampled or configured in physical units.
struct PhysicalAberrations
{
  Length defocus;          ///< C20
  PolarLength astig2;      ///< C22
  PolarLength coma;        ///< C31
  PolarLength astig3;      ///< C33
  Length spherical;        ///< C40

  PhysicalAberrations scaled(double s) const;
  bool operator==(const PhysicalAberrations&) const = default;
};

/// Converts physical coefficients to dimensionless expansion terms.
/// Zero-magnitude entries are omitted.
AberrationSet from_physical(const PhysicalAberrations& phys, double lambda);

struct MicroscopeConfig
{
  /// Validates and derives the wavelength. focal_spread >= 0,
  /// aperture_cutoff (1/Angstrom) >= 0 when present.
  MicroscopeConfig(double voltage_kv, Length focal_spread,
                   std::optional<double> aperture_cutoff = std::nullopt);

  double voltage_kv;
  double lambda;          ///< Angstrom
  Length focal_spread;    ///< defocus spread delta
  std::optional<double> aperture_cutoff;
};

/// chi at a single point given in polar form.
double chi_polar(const AberrationSet& ab, double q_norm, double q_theta,
                 double lambda);

/// chi on every grid sample (row-major), evaluated term by term in polar
/// form.
std::vector<double> chi(const AberrationSet& ab, const FrequencyGrid& grid,
                        double lambda);

/// Precomputed evaluator using the expanded cos/sin form, with the angular
/// harmonics taken from powers of q_x + i q_y. Takes Cartesian coordinates so
/// no trigonometry is needed per sample.
class ChiEvaluator
{
public:
  ChiEvaluator(const AberrationSet& ab, double lambda);

  double operator()(double q_x, double q_y) const;
  /// Batch form of operator(); out[k] = chi(q_x[k], q_y[k]).
  void evaluate(std::span<const double> q_x, std::span<const double> q_y,
                std::span<double> out) const;
  bool is_zero() const { return m_terms.empty(); }

private:
  struct Term
  {
    int m;
    int n;
    double cos_coeff; ///< lambda^m C_mag cos(n C_ang)
    double sin_coeff; ///< lambda^m C_mag sin(n C_ang)
  };
  std::vector<Term> m_terms;
  int m_max_n = 0;
  int m_max_m = 0;
};

} // namespace ctfkit
