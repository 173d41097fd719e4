// ctfkit/maps.hpp
//
// Parameter sweeps over the metrics: epsilon over (defocus, Cs), sigma and
// delta-epsilon over (train defocus, test defocus), and 1D CTF profiles.

#pragma once

#include "ctfkit/aberrations.hpp"
#include "ctfkit/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ctfkit {

struct MapAxis
{
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  /// count >= 2 and min < max.
  void validate(const std::string& name) const;
  /// Evenly spaced, both ends included.
  std::vector<double> values() const;
};

/// Row-major table, rows x cols.
struct Table
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct EpsilonMapSpec
{
  MicroscopeConfig config;
  MapAxis defocus_nm;        ///< columns
  MapAxis spherical_mm;      ///< rows
  PhysicalAberrations fixed; ///< defocus and spherical are overwritten
  GridPolicy policy;
};

struct EpsilonMap
{
  std::vector<double> defocus_nm;
  std::vector<double> spherical_mm;
  Table epsilon; ///< rows = spherical, cols = defocus
  std::size_t grid_n = 0;
  double grid_q_max = 0.0;
};

EpsilonMap epsilon_map(const EpsilonMapSpec& spec);

struct ShiftMapSpec
{
  MicroscopeConfig config;
  MapAxis train_defocus_nm; ///< rows
  MapAxis test_defocus_nm;  ///< cols
  PhysicalAberrations fixed; ///< defocus is overwritten
  GridPolicy policy;
};

struct ShiftMap
{
  std::vector<double> train_defocus_nm;
  std::vector<double> test_defocus_nm;
  Table sigma;      ///< NaN where the training condition is degenerate
  Table delta_eps;
  Table degenerate; ///< 1 where sigma is undefined, else 0
  std::vector<double> eps_train;
  std::vector<double> eps_test;
  std::size_t grid_n = 0;
  double grid_q_max = 0.0;
};

ShiftMap shift_map(const ShiftMapSpec& spec);

struct ProfileRow
{
  double q = 0.0;
  double t_abs = 0.0;
  double env = 0.0;
};

/// |T| and E along q_theta = 0; q must be ascending with >= 2 points.
std::vector<ProfileRow> ctf_profile(const AberrationSet& ab,
                                    const MicroscopeConfig& config,
                                    const std::vector<double>& q);

/// Writes '# ' prefixed header lines, then a corner cell, the column values,
/// and one row per row value.
void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                     const std::string& corner,
                     const std::vector<double>& row_values,
                     const std::vector<double>& col_values, const Table& t);

void write_profile_csv(std::ostream& os, const std::vector<std::string>& header,
                       const std::vector<ProfileRow>& rows);

} // namespace ctfkit
