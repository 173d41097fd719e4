// ctfkit/units.hpp
//
// Lengths are stored in Angstrom. Anything that crosses a public boundary in
// nm, um or mm goes through Length so the conversion happens exactly once.

#pragma once

#include <compare>

namespace ctfkit {

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
// CODATA 2018
inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double electron_mass = 9.1093837015e-31; // kg
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double speed_of_light = 299792458.0;     // m/s
} // namespace constants

class Length
{
public:
  constexpr Length() = default;

  static constexpr Length angstrom(double v) { return Length(v); }
  static constexpr Length nm(double v) { return Length(v * 10.0); }
  static constexpr Length um(double v) { return Length(v * 1e4); }
  static constexpr Length mm(double v) { return Length(v * 1e7); }

  constexpr double in_angstrom() const { return m_angstrom; }
  constexpr double in_nm() const { return m_angstrom / 10.0; }
  constexpr double in_um() const { return m_angstrom / 1e4; }
  constexpr double in_mm() const { return m_angstrom / 1e7; }

  constexpr Length operator-() const { return Length(-m_angstrom); }
  constexpr Length operator*(double s) const { return Length(m_angstrom * s); }
  constexpr auto operator<=>(const Length&) const = default;

private:
  constexpr explicit Length(double a) : m_angstrom(a) {}
  double m_angstrom = 0.0;
};

} // namespace ctfkit
