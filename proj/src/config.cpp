#include "ctfkit/config.hpp"

#include "ctfkit/error.hpp"
#include "ctfkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace ctfkit {

namespace {

using K = ValueKind;

const std::vector<ConfigKey> schema = {
    {"microscope", "voltage_kV", K::number, "300"},
    {"microscope", "focal_spread_A", K::number, "10"},
    {"microscope", "aperture_inv_A", K::number, ""},
    {"microscope", "dose_e_per_A2", K::number, ""},

    {"aberrations", "defocus_nm", K::number, "0"},
    {"aberrations", "astig2_nm", K::number, "0"},
    {"aberrations", "astig2_angle_rad", K::number, "0"},
    {"aberrations", "coma_um", K::number, "0"},
    {"aberrations", "coma_angle_rad", K::number, "0"},
    {"aberrations", "astig3_um", K::number, "0"},
    {"aberrations", "astig3_angle_rad", K::number, "0"},
    {"aberrations", "spherical_mm", K::number, "0"},

    {"grid", "n", K::integer, "1024"},
    {"grid", "q_max_inv_A", K::number, ""},
    {"grid", "weight_file", K::text, ""},

    {"sampling", "mode", K::text, "target"},
    {"sampling", "count", K::integer, "16"},
    {"sampling", "images_per_batch", K::integer, "8"},
    {"sampling", "seed", K::integer, "0"},
    {"sampling", "defocus_max_nm", K::number, "15"},
    {"sampling", "astig2_max_nm", K::number, "3"},
    {"sampling", "coma_max_um", K::number, "0.2"},
    {"sampling", "astig3_max_um", K::number, "0.2"},
    {"sampling", "spherical_max_mm", K::number, "0.1"},
    {"sampling", "jitter_fraction", K::number, "0.125"},
    {"sampling", "rotation_max_rad", K::number, "0.125"},
    {"sampling", "rotation_jitter_rad", K::number, "0.19634954084936207"},
    {"sampling", "reduced_scale", K::number, "0.2"},

    {"passbands", "orders", K::number_list, "0.25,0.5,0.75,1,1.25,1.5,2.25,3.25"},
    {"passbands", "points", K::integer, "64"},
    {"passbands", "spherical_min_um", K::number, "0.1"},
    {"passbands", "spherical_max_mm", K::number, "0.1"},
    {"passbands", "defocus_max_nm", K::number, "15"},

    {"map", "defocus_min_nm", K::number, "-30"},
    {"map", "defocus_max_nm", K::number, "30"},
    {"map", "defocus_count", K::integer, "61"},
    {"map", "spherical_min_mm", K::number, "-0.1"},
    {"map", "spherical_max_mm", K::number, "0.1"},
    {"map", "spherical_count", K::integer, "61"},
    {"map", "train_defocus_min_nm", K::number, "-25"},
    {"map", "train_defocus_max_nm", K::number, "25"},
    {"map", "train_defocus_count", K::integer, "51"},
    {"map", "test_defocus_min_nm", K::number, "-25"},
    {"map", "test_defocus_max_nm", K::number, "25"},
    {"map", "test_defocus_count", K::integer, "51"},
    {"map", "profile_q_max_inv_A", K::number, "2.5"},
    {"map", "profile_count", K::integer, "501"},
    {"map", "pgm", K::flag, "false"},

    {"phantom", "kind", K::text, "lattice"},
    {"phantom", "size_px", K::integer, "256"},
    {"phantom", "pixel_size_A", K::number, "0.25"},
    {"phantom", "lattice_period_A", K::number, "4"},
    {"phantom", "amplitude_V_A", K::number, "5"},
    {"phantom", "width_A", K::number, "0.4"},
    {"phantom", "blob_count", K::integer, "12"},
    {"phantom", "seed", K::integer, "0"},
    {"phantom", "calibrate_half_width_nm", K::number, "10"},

    {"output", "path", K::text, ""},
};

const ConfigKey* find_key(std::string_view section, std::string_view key)
{
  auto it = std::find_if(schema.begin(), schema.end(), [&](const ConfigKey& k) {
    return k.section == section && k.key == key;
  });
  return it == schema.end() ? nullptr : &*it;
}

bool known_section(std::string_view section)
{
  return std::any_of(schema.begin(), schema.end(),
                     [&](const ConfigKey& k) { return k.section == section; });
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string full_name(std::string_view section, std::string_view key)
{
  return std::string(section) + "." + std::string(key);
}

/// Canonical text for a value of the given kind; throws std::invalid_argument.
std::string canonical(ValueKind kind, std::string_view value)
{
  value = trim(value);
  switch (kind) {
  case ValueKind::number:
    return format_number(parse_number(value));
  case ValueKind::integer: {
    std::int64_t v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (value.empty() || res.ec != std::errc() ||
        res.ptr != value.data() + value.size())
      throw std::invalid_argument("not an integer: '" + std::string(value) + "'");
    return std::to_string(v);
  }
  case ValueKind::flag:
    if (value == "true" || value == "1" || value == "yes")
      return "true";
    if (value == "false" || value == "0" || value == "no")
      return "false";
    throw std::invalid_argument("not a boolean: '" + std::string(value) + "'");
  case ValueKind::number_list: {
    std::string out;
    std::size_t start = 0;
    while (start <= value.size()) {
      const std::size_t comma = value.find(',', start);
      const auto item = value.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      if (!out.empty())
        out += ',';
      out += format_number(parse_number(item));
      if (comma == std::string_view::npos)
        break;
      start = comma + 1;
    }
    return out;
  }
  case ValueKind::text:
    return std::string(value);
  }
  return std::string(value);
}

} // namespace

const std::vector<ConfigKey>& config_schema()
{
  return schema;
}

RunConfig RunConfig::parse(std::string_view text, std::string_view origin)
{
  RunConfig cfg;
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                      : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;

    const std::string where = std::string(origin) + ":" + std::to_string(lineno);
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos)
      line = line.substr(0, c);
    line = trim(line);
    if (line.empty())
      continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where + ": malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_section(section))
        throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(where + ": key '" + std::string(key) +
                        "' outside of any section");
    if (cfg.has(section, key))
      throw ConfigError(where + ": duplicate key " + full_name(section, key));
    try {
      cfg.set(section, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path)
{
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path.string());
}

RunConfig RunConfig::from_header(std::string_view text)
{
  std::string body;
  bool inside = false;
  bool seen_end = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0 && line != "#")
      continue;
    const std::string content = line.size() > 2 ? line.substr(2) : std::string();
    if (content == header_begin) {
      inside = true;
      continue;
    }
    if (content == header_end) {
      seen_end = inside;
      break;
    }
    if (inside)
      body += content + "\n";
  }
  if (!seen_end)
    throw ConfigError("no embedded configuration found");
  return parse(body, "header");
}

void RunConfig::set(std::string_view section, std::string_view key,
                    std::string_view value)
{
  const ConfigKey* k = find_key(section, key);
  if (!k)
    throw ConfigError("unknown key " + full_name(section, key));
  try {
    m_values[full_name(section, key)] = canonical(k->kind, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("bad value for " + full_name(section, key) + ": " + e.what());
  }
}

bool RunConfig::has(std::string_view section, std::string_view key) const
{
  return m_values.count(full_name(section, key)) != 0;
}

std::optional<std::string> RunConfig::raw(std::string_view section,
                                          std::string_view key) const
{
  const ConfigKey* k = find_key(section, key);
  if (!k)
    throw ConfigError("unknown key " + full_name(section, key));
  if (auto it = m_values.find(full_name(section, key)); it != m_values.end())
    return it->second;
  if (!k->fallback.empty())
    return canonical(k->kind, k->fallback);
  return std::nullopt;
}

double RunConfig::number(std::string_view section, std::string_view key) const
{
  auto v = optional_number(section, key);
  if (!v)
    throw ConfigError("missing required key " + full_name(section, key));
  return *v;
}

std::optional<double> RunConfig::optional_number(std::string_view section,
                                                 std::string_view key) const
{
  auto v = raw(section, key);
  if (!v)
    return std::nullopt;
  return parse_number(*v);
}

std::int64_t RunConfig::integer(std::string_view section,
                                std::string_view key) const
{
  auto v = raw(section, key);
  if (!v)
    throw ConfigError("missing required key " + full_name(section, key));
  return std::stoll(*v);
}

std::string RunConfig::text(std::string_view section, std::string_view key) const
{
  auto v = raw(section, key);
  if (!v)
    throw ConfigError("missing required key " + full_name(section, key));
  return *v;
}

std::optional<std::string> RunConfig::optional_text(std::string_view section,
                                                    std::string_view key) const
{
  return raw(section, key);
}

bool RunConfig::flag(std::string_view section, std::string_view key) const
{
  return text(section, key) == "true";
}

std::vector<double> RunConfig::number_list(std::string_view section,
                                           std::string_view key) const
{
  const std::string v = text(section, key);
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = v.find(',', start);
    out.push_back(parse_number(std::string_view(v).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> RunConfig::resolved_lines() const
{
  std::vector<std::string> lines;
  std::string_view current;
  for (const auto& k : schema) {
    const auto v = raw(k.section, k.key);
    if (!v)
      continue;
    if (k.section != current) {
      lines.push_back("[" + std::string(k.section) + "]");
      current = k.section;
    }
    lines.push_back(std::string(k.key) + " = " + *v);
  }
  return lines;
}

} // namespace ctfkit
