#include "ctfkit/commands.hpp"

#include "ctfkit/config.hpp"
#include "ctfkit/error.hpp"
#include "ctfkit/imaging.hpp"
#include "ctfkit/io.hpp"
#include "ctfkit/maps.hpp"
#include "ctfkit/metrics.hpp"
#include "ctfkit/sampling.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ctfkit {

namespace {

struct Options
{
  std::string config_path;
  std::string test_config_path;
  std::optional<std::int64_t> seed;
  std::string out_path;
  std::optional<std::int64_t> grid_n;
  std::optional<double> grid_qmax;
  std::string profile_path;
};

struct Context
{
  std::string command;
  RunConfig config;
  std::optional<RunConfig> test_config;
  std::string out_path;
  std::string profile_path;
  std::ostream& out;
  std::ostream& err;
};

RunConfig load_config(const std::string& path, const Options& opt)
{
  RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::load(path);
  if (opt.seed)
    cfg.set("sampling", "seed", std::to_string(*opt.seed));
  if (opt.grid_n)
    cfg.set("grid", "n", std::to_string(*opt.grid_n));
  if (opt.grid_qmax)
    cfg.set("grid", "q_max_inv_A", format_number(*opt.grid_qmax));
  return cfg;
}

void append_config_block(std::vector<std::string>& lines, const RunConfig& cfg,
                         std::string_view begin, std::string_view end)
{
  lines.emplace_back(begin);
  bool in_output = false;
  // The output location is not part of what a run computes.
  for (auto& l : cfg.resolved_lines()) {
    if (!l.empty() && l.front() == '[')
      in_output = l == "[output]";
    if (!in_output)
      lines.push_back(l);
  }
  lines.emplace_back(end);
}

std::vector<std::string> header_lines(const Context& ctx)
{
  std::vector<std::string> lines = {
      std::string("ctfkit ") + version_string,
      "command: " + ctx.command,
  };
  append_config_block(lines, ctx.config, RunConfig::header_begin,
                      RunConfig::header_end);
  if (ctx.test_config)
    append_config_block(lines, *ctx.test_config, "--- test config ---",
                        "--- end test config ---");
  return lines;
}

std::string grid_line(std::size_t n, double q_max)
{
  return "grid: n=" + std::to_string(n) + " q_max_inv_A=" + format_number(q_max);
}

std::string commented(const std::vector<std::string>& lines)
{
  std::string s;
  for (const auto& l : lines)
    s += "# " + l + "\n";
  return s;
}

std::optional<std::string> output_path(const Context& ctx)
{
  if (!ctx.out_path.empty())
    return ctx.out_path;
  return ctx.config.optional_text("output", "path");
}

std::string require_output_path(const Context& ctx)
{
  auto p = output_path(ctx);
  if (!p)
    throw ConfigError(ctx.command + " needs an output path (--out or [output] path)");
  return *p;
}

/// To the output path if one is configured, else to stdout.
void emit(const Context& ctx, const std::string& text)
{
  if (auto p = output_path(ctx))
    write_text_file(*p, text);
  else
    ctx.out << text;
}

MicroscopeConfig microscope(const RunConfig& c)
{
  return MicroscopeConfig(c.number("microscope", "voltage_kV"),
                          Length::angstrom(c.number("microscope", "focal_spread_A")),
                          c.optional_number("microscope", "aperture_inv_A"));
}

PhysicalAberrations physical(const RunConfig& c)
{
  PhysicalAberrations p;
  p.defocus = Length::nm(c.number("aberrations", "defocus_nm"));
  p.astig2 = {Length::nm(c.number("aberrations", "astig2_nm")),
              c.number("aberrations", "astig2_angle_rad")};
  p.coma = {Length::um(c.number("aberrations", "coma_um")),
            c.number("aberrations", "coma_angle_rad")};
  p.astig3 = {Length::um(c.number("aberrations", "astig3_um")),
              c.number("aberrations", "astig3_angle_rad")};
  p.spherical = Length::mm(c.number("aberrations", "spherical_mm"));
  return p;
}

std::size_t positive_size(const RunConfig& c, std::string_view section,
                          std::string_view key)
{
  const auto v = c.integer(section, key);
  if (v <= 0)
    throw ConfigError(std::string(section) + "." + std::string(key) +
                      " must be positive");
  return std::size_t(v);
}

std::uint64_t seed_of(const RunConfig& c, std::string_view section)
{
  const auto v = c.integer(section, "seed");
  if (v < 0)
    throw ConfigError(std::string(section) + ".seed must be non-negative");
  return std::uint64_t(v);
}

GridPolicy grid_policy(const RunConfig& c)
{
  GridPolicy p;
  p.n = positive_size(c, "grid", "n");
  p.q_max = c.optional_number("grid", "q_max_inv_A");
  return p;
}

std::optional<SpectralWeight> weight_of(const RunConfig& c)
{
  if (auto path = c.optional_text("grid", "weight_file"))
    return SpectralWeight::load(*path);
  return std::nullopt;
}

SamplingSpec sampling_spec(const RunConfig& c)
{
  SamplingSpec s;
  s.defocus_max = Length::nm(c.number("sampling", "defocus_max_nm"));
  s.astig2_max = Length::nm(c.number("sampling", "astig2_max_nm"));
  s.coma_max = Length::um(c.number("sampling", "coma_max_um"));
  s.astig3_max = Length::um(c.number("sampling", "astig3_max_um"));
  s.spherical_max = Length::mm(c.number("sampling", "spherical_max_mm"));
  s.jitter_fraction = c.number("sampling", "jitter_fraction");
  s.rotation_max = c.number("sampling", "rotation_max_rad");
  s.rotation_jitter_std = c.number("sampling", "rotation_jitter_rad");
  s.reduced_scale = c.number("sampling", "reduced_scale");
  s.seed = seed_of(c, "sampling");
  s.validate();
  return s;
}

PassbandSpec passband_spec(const RunConfig& c)
{
  PassbandSpec p;
  p.orders = c.number_list("passbands", "orders");
  p.points = positive_size(c, "passbands", "points");
  p.spherical_min = Length::um(c.number("passbands", "spherical_min_um"));
  p.spherical_cap = Length::mm(c.number("passbands", "spherical_max_mm"));
  p.defocus_cap = Length::nm(c.number("passbands", "defocus_max_nm"));
  p.validate();
  return p;
}

MapAxis axis(const RunConfig& c, const std::string& prefix)
{
  return {c.number("map", prefix + "_min_nm"), c.number("map", prefix + "_max_nm"),
          positive_size(c, "map", prefix + "_count")};
}

PhaseObject phantom(const RunConfig& c, double voltage_kv)
{
  const std::size_t n = positive_size(c, "phantom", "size_px");
  const RealGrid grid(n, n, c.number("phantom", "pixel_size_A"));
  const std::string kind = c.text("phantom", "kind");
  const double amp = c.number("phantom", "amplitude_V_A");
  const double width = c.number("phantom", "width_A");
  if (kind == "lattice")
    return lattice_phantom(grid, c.number("phantom", "lattice_period_A"), amp,
                           width, voltage_kv);
  if (kind == "random")
    return random_phantom(grid, positive_size(c, "phantom", "blob_count"), amp,
                          width, seed_of(c, "phantom"), voltage_kv);
  if (kind == "none")
    return PhaseObject(grid, std::vector<double>(grid.size(), 0.0), voltage_kv);
  throw ConfigError("phantom.kind must be lattice, random or none, got '" +
                    kind + "'");
}

void write_pgm_with_header(const Context& ctx, const std::string& path,
                           std::size_t nx, std::size_t ny,
                           std::span<const double> values,
                           const std::vector<std::string>& extra)
{
  write_pgm16(path, nx, ny, values);
  auto lines = header_lines(ctx);
  lines.insert(lines.end(), extra.begin(), extra.end());
  write_text_file(path + ".config.txt", commented(lines));
}

/// "x.csv" -> "x", anything else unchanged.
std::string stem_of(const std::string& path)
{
  if (path.size() > 4 && path.ends_with(".csv"))
    return path.substr(0, path.size() - 4);
  return path;
}

// ---------------------------------------------------------------- commands

int cmd_epsilon(Context& ctx)
{
  const auto cfg = microscope(ctx.config);
  const auto ab = from_physical(physical(ctx.config), cfg.lambda);
  const auto weight = weight_of(ctx.config);
  const GridPtr grid = grid_policy(ctx.config).make_grid(cfg);
  const NodeLayout layout = weight && !weight->is_radial()
                                ? NodeLayout::full
                                : preferred_layout(ab, *grid);
  const auto t = transfer_abs(ab, cfg, grid, layout);
  const double eps = epsilon(t, weight ? &*weight : nullptr);

  auto lines = header_lines(ctx);
  lines.push_back(grid_line(grid->n_x(), grid->q_max()));
  std::string text = commented(lines);
  text += "epsilon\n" + format_number(eps) + "\n";
  emit(ctx, text);

  if (!ctx.profile_path.empty()) {
    const double q_hi = ctx.config.number("map", "profile_q_max_inv_A");
    const std::size_t count = positive_size(ctx.config, "map", "profile_count");
    MapAxis q_axis{0.0, q_hi, count};
    q_axis.validate("profile q");
    std::ostringstream os;
    write_profile_csv(os, header_lines(ctx), ctf_profile(ab, cfg, q_axis.values()));
    write_text_file(ctx.profile_path, os.str());
  }
  return 0;
}

struct Pair
{
  AberrationSet train;
  MicroscopeConfig train_cfg;
  AberrationSet test;
  MicroscopeConfig test_cfg;
};

Pair load_pair(const Context& ctx)
{
  if (!ctx.test_config)
    throw ConfigError(ctx.command + " needs --test-config");
  const auto a = microscope(ctx.config);
  const auto b = microscope(*ctx.test_config);
  return {from_physical(physical(ctx.config), a.lambda), a,
          from_physical(physical(*ctx.test_config), b.lambda), b};
}

ShiftReport pair_report(const Context& ctx)
{
  const Pair p = load_pair(ctx);
  const auto weight = weight_of(ctx.config);
  return shift_report(p.train, p.train_cfg, p.test, p.test_cfg,
                      grid_policy(ctx.config), weight ? &*weight : nullptr);
}

int cmd_sigma(Context& ctx)
{
  const ShiftReport r = pair_report(ctx);
  auto lines = header_lines(ctx);
  lines.push_back(grid_line(r.grid_n, r.grid_q_max));
  emit(ctx, commented(lines) + "sigma\n" + format_number(r.sigma) + "\n");
  return 0;
}

int cmd_shift(Context& ctx)
{
  const ShiftReport r = pair_report(ctx);
  auto lines = header_lines(ctx);
  lines.push_back(grid_line(r.grid_n, r.grid_q_max));
  std::string text = commented(lines);
  text += "eps_train,eps_test,sigma,delta_eps,grid_n,grid_q_max_inv_A\n";
  text += format_number(r.eps_train) + "," + format_number(r.eps_test) + "," +
          format_number(r.sigma) + "," + format_number(r.delta_eps) + "," +
          std::to_string(r.grid_n) + "," + format_number(r.grid_q_max) + "\n";
  emit(ctx, text);
  return 0;
}

int cmd_map_epsilon(Context& ctx)
{
  const RunConfig& c = ctx.config;
  EpsilonMapSpec spec{microscope(c),
                      axis(c, "defocus"),
                      {c.number("map", "spherical_min_mm"),
                       c.number("map", "spherical_max_mm"),
                       positive_size(c, "map", "spherical_count")},
                      physical(c),
                      grid_policy(c)};
  const EpsilonMap m = epsilon_map(spec);

  auto lines = header_lines(ctx);
  lines.push_back(grid_line(m.grid_n, m.grid_q_max));
  lines.push_back("rows: spherical_mm, columns: defocus_nm, values: epsilon");
  std::ostringstream os;
  write_table_csv(os, lines, "spherical_mm\\defocus_nm", m.spherical_mm,
                  m.defocus_nm, m.epsilon);
  emit(ctx, os.str());

  if (c.flag("map", "pgm"))
    write_pgm_with_header(ctx, stem_of(require_output_path(ctx)) + ".pgm",
                          m.epsilon.cols, m.epsilon.rows, m.epsilon.values,
                          {grid_line(m.grid_n, m.grid_q_max)});
  return 0;
}

int cmd_map_shift(Context& ctx)
{
  const RunConfig& c = ctx.config;
  const std::string base = stem_of(require_output_path(ctx));
  ShiftMapSpec spec{microscope(c), axis(c, "train_defocus"),
                    axis(c, "test_defocus"), physical(c), grid_policy(c)};
  const ShiftMap m = shift_map(spec);

  auto write = [&](const std::string& suffix, const std::string& what,
                   const Table& t) {
    auto lines = header_lines(ctx);
    lines.push_back(grid_line(m.grid_n, m.grid_q_max));
    lines.push_back("rows: train_defocus_nm, columns: test_defocus_nm, values: " +
                    what);
    std::ostringstream os;
    write_table_csv(os, lines, "train_defocus_nm\\test_defocus_nm",
                    m.train_defocus_nm, m.test_defocus_nm, t);
    write_text_file(base + suffix + ".csv", os.str());
    if (c.flag("map", "pgm"))
      write_pgm_with_header(ctx, base + suffix + ".pgm", t.cols, t.rows,
                            t.values, {grid_line(m.grid_n, m.grid_q_max)});
  };
  write(".sigma", "sigma (nan where the training transfer is degenerate)",
        m.sigma);
  write(".delta_eps", "delta_epsilon", m.delta_eps);
  write(".degenerate", "1 where sigma is undefined", m.degenerate);

  std::size_t bad = 0;
  for (double d : m.degenerate.values)
    bad += d != 0.0;
  ctx.err << "wrote " << base << ".{sigma,delta_eps,degenerate}.csv";
  if (bad)
    ctx.err << " (" << bad << " degenerate cells)";
  ctx.err << '\n';
  return 0;
}

int cmd_ctf_profile(Context& ctx)
{
  const auto cfg = microscope(ctx.config);
  const auto ab = from_physical(physical(ctx.config), cfg.lambda);
  MapAxis q_axis{0.0, ctx.config.number("map", "profile_q_max_inv_A"),
                 positive_size(ctx.config, "map", "profile_count")};
  q_axis.validate("profile q");
  std::ostringstream os;
  write_profile_csv(os, header_lines(ctx), ctf_profile(ab, cfg, q_axis.values()));
  emit(ctx, os.str());
  return 0;
}

int cmd_sample(Context& ctx)
{
  const RunConfig& c = ctx.config;
  const SamplingSpec spec = sampling_spec(c);
  const std::string mode = c.text("sampling", "mode");
  std::vector<ConditionRecord> rows;

  if (mode == "target") {
    const std::size_t count = positive_size(c, "sampling", "count");
    for (std::size_t k = 0; k < count; ++k)
      rows.push_back({sample_target_condition(spec, k), spec.seed, k});
  } else if (mode == "batch") {
    const std::size_t count = positive_size(c, "sampling", "count");
    const std::size_t per = positive_size(c, "sampling", "images_per_batch");
    for (std::size_t b = 0; b < count; ++b) {
      const auto target = sample_target_condition(spec, b);
      for (std::size_t k = 0; k < per; ++k) {
        const std::uint64_t index = b * per + k;
        Rng rng = Rng::substream(spec.seed, streams::jitter, index);
        rows.push_back({jitter_condition(target, spec, rng), spec.seed, index});
      }
    }
  } else if (mode == "passband") {
    const auto cfg = microscope(c);
    const PassbandSet set = passband_conditions(passband_spec(c), cfg.lambda);
    for (double o : set.empty_orders)
      ctx.err << "passband order " << format_number(o)
              << " has no admissible Cs values\n";
    for (std::size_t k = 0; k < set.pairs.size(); ++k) {
      Rng rng = Rng::substream(spec.seed, streams::passband, k);
      rows.push_back(
          {sample_passband_condition(set.pairs[k], spec, rng), spec.seed, k});
    }
  } else {
    throw ConfigError("sampling.mode must be target, batch or passband, got '" +
                      mode + "'");
  }

  std::ostringstream os;
  os << commented(header_lines(ctx));
  write_conditions_csv(os, rows);
  emit(ctx, os.str());
  return 0;
}

int cmd_passbands(Context& ctx)
{
  const auto cfg = microscope(ctx.config);
  const PassbandSpec spec = passband_spec(ctx.config);
  const PassbandSet set = passband_conditions(spec, cfg.lambda);
  for (double o : set.empty_orders)
    ctx.err << "passband order " << format_number(o)
            << " has no admissible Cs values\n";
  std::string text = commented(header_lines(ctx));
  text += "order,defocus_nm,spherical_mm,spherical_max_mm\n";
  for (const auto& p : set.pairs)
    text += format_number(p.order) + "," + format_number(p.defocus.in_nm()) +
            "," + format_number(p.spherical.in_mm()) + "," +
            format_number(spec.spherical_max(p.order, cfg.lambda).in_mm()) + "\n";
  emit(ctx, text);
  return 0;
}

int cmd_simulate(Context& ctx)
{
  const RunConfig& c = ctx.config;
  const std::string path = require_output_path(ctx);
  const auto cfg = microscope(c);
  const auto ab = from_physical(physical(c), cfg.lambda);
  const PhaseObject obj = phantom(c, cfg.voltage_kv);
  Micrograph m = simulate(obj, ab, cfg);
  if (auto dose = c.optional_number("microscope", "dose_e_per_A2")) {
    Rng rng = Rng::substream(seed_of(c, "sampling"), streams::dose, 0);
    m = apply_dose(m, *dose, rng);
  }

  const std::size_t nx = m.grid.n_x();
  const std::size_t ny = m.grid.n_y();
  if (path.ends_with(".pgm")) {
    write_pgm_with_header(ctx, path, nx, ny, m.intensity, {});
  } else {
    write_raw_f32(path, nx, ny, m.grid.pixel_size(), m.intensity);
    write_text_file(path + ".config.txt", commented(header_lines(ctx)));
  }

  double mean = 0.0;
  double lo = m.intensity.front();
  double hi = m.intensity.front();
  for (double v : m.intensity) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mean /= double(m.intensity.size());
  double var = 0.0;
  for (double v : m.intensity)
    var += (v - mean) * (v - mean);
  ctx.out << "n_x,n_y,pixel_size_A,mean,std,min,max\n"
          << nx << ',' << ny << ',' << format_number(m.grid.pixel_size()) << ','
          << format_number(mean) << ','
          << format_number(std::sqrt(var / double(m.intensity.size()))) << ','
          << format_number(lo) << ',' << format_number(hi) << '\n';
  return 0;
}

int cmd_calibrate(Context& ctx)
{
  const RunConfig& c = ctx.config;
  const auto cfg = microscope(c);
  const auto ab = from_physical(physical(c), cfg.lambda);
  const PhaseObject obj = phantom(c, cfg.voltage_kv);
  const auto r = calibrate_min_contrast(
      obj, ab, cfg, Length::nm(c.number("phantom", "calibrate_half_width_nm")));
  std::string text = commented(header_lines(ctx));
  text += "offset_A,contrast,coarse_offset_A\n";
  text += format_number(r.offset.in_angstrom()) + "," + format_number(r.contrast) +
          "," + format_number(r.coarse_offset.in_angstrom()) + "\n";
  emit(ctx, text);
  return 0;
}

struct Command
{
  const char* name;
  const char* help;
  int (*run)(Context&);
};

constexpr Command commands[] = {
    {"epsilon", "information transfer epsilon of one condition", cmd_epsilon},
    {"sigma", "overlap sigma of a train/test pair", cmd_sigma},
    {"shift", "full shift report of a train/test pair", cmd_shift},
    {"map-epsilon", "epsilon over (defocus, Cs)", cmd_map_epsilon},
    {"map-shift", "sigma and delta epsilon over train/test defocus", cmd_map_shift},
    {"ctf-profile", "|T| and envelope along one frequency axis", cmd_ctf_profile},
    {"sample", "random imaging conditions", cmd_sample},
    {"passbands", "defocus/Cs pairs on the passband loci", cmd_passbands},
    {"simulate", "phase-object micrograph", cmd_simulate},
    {"calibrate", "defocus offset of minimum contrast", cmd_calibrate},
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err)
{
  CLI::App app{"ctfkit: contrast transfer metrics and image simulation", "ctfkit"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "configuration file");
  app.add_option("--test-config", opt.test_config_path,
                 "configuration of the test condition (sigma, shift)");
  app.add_option("--seed", opt.seed, "override the sampling seed");
  app.add_option("--out", opt.out_path, "output file (default: stdout)");
  app.add_option("--grid-n", opt.grid_n, "integration grid size");
  app.add_option("--grid-qmax", opt.grid_qmax, "integration grid extent, 1/A");
  app.set_version_flag("--version", version_string);

  const Command* chosen = nullptr;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help)->fallthrough();
    if (std::string_view(c.name) == "epsilon")
      sub->add_option("--profile", opt.profile_path,
                      "also write the CTF profile to this file");
    sub->callback([&chosen, &c] { chosen = &c; });
  }

  std::vector<std::string> argv_store = {"ctfkit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store)
    argv.push_back(a.data());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Context ctx{chosen->name, load_config(opt.config_path, opt), std::nullopt,
                opt.out_path, opt.profile_path, out, err};
    if (!opt.test_config_path.empty())
      ctx.test_config = load_config(opt.test_config_path, opt);
    return chosen->run(ctx);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const DegenerateTraining& e) {
    err << "degenerate metric: " << e.what() << '\n';
    return 3;
  } catch (const DegenerateEnvelope& e) {
    err << "degenerate metric: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace ctfkit
