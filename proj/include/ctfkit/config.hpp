// ctfkit/config.hpp
//
// Run configuration: an INI-style text file with a fixed schema. Unknown
// sections or keys are errors, every physical quantity carries its unit in
// the key name (defocus_nm, spherical_mm, focal_spread_A, ...).

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctfkit {

enum class ValueKind
{
  number,
  integer,
  text,
  flag,
  number_list,
};

struct ConfigKey
{
  std::string_view section;
  std::string_view key;
  ValueKind kind;
  /// Default value as text; empty means the key is optional with no default.
  std::string_view fallback;
};

/// The full schema, in emission order.
const std::vector<ConfigKey>& config_schema();

class RunConfig
{
public:
  RunConfig() = default;

  /// Throws ConfigError naming the offending key (and line).
  static RunConfig parse(std::string_view text, std::string_view origin = "config");
  static RunConfig load(const std::filesystem::path& path);

  /// Recovers the configuration embedded in an output header written by
  /// header_lines().
  static RunConfig from_header(std::string_view text);

  /// Validated assignment; throws ConfigError for unknown keys or values of
  /// the wrong kind.
  void set(std::string_view section, std::string_view key, std::string_view value);
  bool has(std::string_view section, std::string_view key) const;

  double number(std::string_view section, std::string_view key) const;
  std::optional<double> optional_number(std::string_view section,
                                        std::string_view key) const;
  std::int64_t integer(std::string_view section, std::string_view key) const;
  std::string text(std::string_view section, std::string_view key) const;
  std::optional<std::string> optional_text(std::string_view section,
                                           std::string_view key) const;
  bool flag(std::string_view section, std::string_view key) const;
  std::vector<double> number_list(std::string_view section,
                                  std::string_view key) const;

  /// Resolved configuration (explicit values, then defaults) as INI text,
  /// one line per entry.
  std::vector<std::string> resolved_lines() const;

  static constexpr std::string_view header_begin = "--- config ---";
  static constexpr std::string_view header_end = "--- end config ---";

private:
  std::optional<std::string> raw(std::string_view section,
                                 std::string_view key) const;

  std::map<std::string, std::string, std::less<>> m_values; ///< "section.key"
};

} // namespace ctfkit
