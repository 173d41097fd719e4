#include "ctfkit/io.hpp"

#include "ctfkit/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ctfkit {

std::string format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  if (v == 0.0)
    v = 0.0; // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s == "nan")
    return std::nan("");
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

PgmScale write_pgm16(const std::filesystem::path& path, std::size_t n_x,
                     std::size_t n_y, std::span<const double> values)
{
  if (values.size() != n_x * n_y)
    throw std::invalid_argument("pgm size mismatch");
  PgmScale scale{0.0, 0.0};
  bool any = false;
  for (double v : values) {
    if (!std::isfinite(v))
      continue;
    if (!any) {
      scale = {v, v};
      any = true;
    }
    scale.min = std::min(scale.min, v);
    scale.max = std::max(scale.max, v);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << "P5\n" << n_x << ' ' << n_y << "\n65535\n";
  const double range = scale.max - scale.min;
  std::vector<unsigned char> bytes(values.size() * 2);
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::uint16_t level = 0;
    if (std::isfinite(values[k]) && range > 0.0)
      level = std::uint16_t(
          std::lround((values[k] - scale.min) / range * 65535.0));
    bytes[2 * k] = static_cast<unsigned char>(level >> 8);
    bytes[2 * k + 1] = static_cast<unsigned char>(level & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out)
    throw IoError("failed writing " + path.string());

  auto side = path;
  side += ".scale.txt";
  write_text_file(side, "min " + format_number(scale.min) + "\nmax " +
                            format_number(scale.max) + "\n");
  return scale;
}

std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path,
                                      std::size_t& n_x, std::size_t& n_y)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot read " + path.string());
  std::string magic;
  unsigned maxval = 0;
  in >> magic >> n_x >> n_y >> maxval;
  in.get();
  if (magic != "P5" || maxval != 65535)
    throw IoError("not a 16-bit PGM: " + path.string());
  std::vector<unsigned char> bytes(n_x * n_y * 2);
  in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!in)
    throw IoError("truncated PGM: " + path.string());
  std::vector<std::uint16_t> out(n_x * n_y);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::uint16_t((bytes[2 * k] << 8) | bytes[2 * k + 1]);
  return out;
}

void write_raw_f32(const std::filesystem::path& path, std::size_t n_x,
                   std::size_t n_y, double pixel_size,
                   std::span<const double> values)
{
  if (values.size() != n_x * n_y)
    throw std::invalid_argument("raw image size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << n_x << ' ' << n_y << ' ' << format_number(pixel_size) << '\n';
  std::vector<unsigned char> bytes(values.size() * 4);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[k]));
    for (int b = 0; b < 4; ++b)
      bytes[4 * k + std::size_t(b)] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out)
    throw IoError("failed writing " + path.string());
}

RawImage read_raw_f32(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  RawImage img;
  std::string px;
  hs >> img.n_x >> img.n_y >> px;
  if (!hs)
    throw IoError("bad raw header in " + path.string());
  img.pixel_size = parse_number(px);
  std::vector<unsigned char> bytes(img.n_x * img.n_y * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!in)
    throw IoError("truncated raw image " + path.string());
  img.values.resize(img.n_x * img.n_y);
  for (std::size_t k = 0; k < img.values.size(); ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= std::uint32_t(bytes[4 * k + std::size_t(b)]) << (8 * b);
    img.values[k] = std::bit_cast<float>(bits);
  }
  return img;
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path.string());
  out.write(text.data(), std::streamsize(text.size()));
  if (!out)
    throw IoError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace ctfkit
