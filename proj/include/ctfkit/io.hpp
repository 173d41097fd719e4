// ctfkit/io.hpp
//
// Number formatting and the binary image formats (16-bit PGM with a scale
// sidecar, raw little-endian float32 with a one-line text header).

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctfkit {

/// Shortest representation that parses back to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_number(double v);

/// Strict parse of a whole token; throws std::invalid_argument.
double parse_number(std::string_view s);

struct PgmScale
{
  double min = 0.0;
  double max = 0.0;
};

/// Linear min-max scaling to 0..65535, big-endian P5. Non-finite values
/// map to 0. Writes "<path>.scale.txt" with the limits. Throws IoError.
PgmScale write_pgm16(const std::filesystem::path& path, std::size_t n_x,
                     std::size_t n_y, std::span<const double> values);

/// Reads back a 16-bit P5 file (used by tests).
std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path,
                                      std::size_t& n_x, std::size_t& n_y);

/// "<n_x> <n_y> <pixel_size_A>\n" followed by n_x*n_y float32 LE values.
void write_raw_f32(const std::filesystem::path& path, std::size_t n_x,
                   std::size_t n_y, double pixel_size,
                   std::span<const double> values);

struct RawImage
{
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  double pixel_size = 0.0;
  std::vector<float> values;
};

RawImage read_raw_f32(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes; throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

} // namespace ctfkit
