#include "ctfkit/aberrations.hpp"
#include "ctfkit/commands.hpp"
#include "ctfkit/config.hpp"
#include "ctfkit/io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

using namespace ctfkit;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir
{
  fs::path path;
  TempDir()
  {
    path = fs::temp_directory_path() / ("ctfkit_cli_" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter()
  {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& text = {}) const
  {
    const auto p = (path / name).string();
    if (!text.empty())
      write_text_file(p, text);
    return p;
  }
};

/// Last line of a CSV result.
std::string last_line(const std::string& s)
{
  auto end = s.find_last_not_of('\n');
  auto start = s.rfind('\n', end);
  return s.substr(start + 1, end - start);
}

std::vector<double> fields(const std::string& line)
{
  std::vector<double> v;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ','))
    v.push_back(parse_number(tok));
  return v;
}

} // namespace

TEST_CASE("epsilon command")
{
  TempDir d;
  const auto zero = cli({"epsilon", "--grid-n", "256"});
  REQUIRE(zero.code == 0);
  CHECK(parse_number(last_line(zero.out)) <= 1e-6);
  CHECK(zero.out.find("# grid: n=256 q_max_inv_A=") != std::string::npos);

  const double df = std::sqrt(1.5 * electron_wavelength(300) * 2.5e5) / 10.0;
  const auto cs_only = d.file("cs.ini", "[aberrations]\nspherical_mm = 0.025\n");
  const auto passband = d.file("pb.ini", "[aberrations]\nspherical_mm = 0.025\ndefocus_nm = " +
                                             format_number(-df) + "\n");
  const auto a = cli({"epsilon", "--config", passband, "--grid-n", "512"});
  const auto b = cli({"epsilon", "--config", cs_only, "--grid-n", "512"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(parse_number(last_line(a.out)) > parse_number(last_line(b.out)));

  const auto profile = d.file("profile.csv");
  REQUIRE(cli({"epsilon", "--config", passband, "--grid-n", "128", "--profile", profile}).code == 0);
  const auto text = read_text_file(profile);
  CHECK(text.find("q_inv_A,t_abs,envelope\n") != std::string::npos);
}

TEST_CASE("schema violations exit with code 2 and name the key")
{
  TempDir d;
  const auto bad = d.file("bad.ini", "[aberrations]\ndefocus_um = 5\n");
  const auto r = cli({"epsilon", "--config", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("aberrations.defocus_um") != std::string::npos);
  CHECK(r.out.empty());
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"epsilon", "--grid-n", "abc"}).code == 2);
  CHECK(cli({"epsilon", "--grid-n", "7"}).code == 2);
  CHECK(cli({"epsilon", "--config", d.file("none.ini")}).code == 2);
}

TEST_CASE("other exit codes")
{
  TempDir d;
  const auto zero = d.file("zero.ini", "[aberrations]\ndefocus_nm = 0\n");
  const auto gen = d.file("gen.ini", "[aberrations]\ndefocus_nm = -10\n");
  const auto r = cli({"sigma", "--config", zero, "--test-config", gen, "--grid-n", "128"});
  CHECK(r.code == 3);
  CHECK(r.err.find("degenerate") != std::string::npos);
  CHECK(cli({"sample", "--out", (d.path / "no" / "x.csv").string()}).code == 4);
  const auto coherent = d.file("coh.ini", "[microscope]\nfocal_spread_A = 0\n");
  CHECK(cli({"epsilon", "--config", coherent}).code == 2);
  CHECK(cli({"sigma", "--config", gen}).code == 2);
}

TEST_CASE("shift command")
{
  TempDir d;
  const auto m10 = d.file("m10.ini", "[aberrations]\ndefocus_nm = -10\n");
  const auto p10 = d.file("p10.ini", "[aberrations]\ndefocus_nm = 10\n");
  const auto zero = d.file("zero.ini", "[aberrations]\ndefocus_nm = 0\n");

  const auto same = cli({"shift", "--config", m10, "--test-config", m10, "--grid-n", "256"});
  REQUIRE(same.code == 0);
  CHECK(same.out.find("eps_train,eps_test,sigma,delta_eps,grid_n,grid_q_max_inv_A\n") !=
        std::string::npos);
  auto f = fields(last_line(same.out));
  CHECK(f[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f[3] == 0.0);

  f = fields(last_line(cli({"shift", "--config", m10, "--test-config", p10, "--grid-n", "256"}).out));
  CHECK(std::isfinite(f[2]));
  CHECK(f[2] == doctest::Approx(1.0).epsilon(1e-9));

  f = fields(last_line(cli({"shift", "--config", m10, "--test-config", zero, "--grid-n", "256"}).out));
  CHECK(f[2] < 0.1);
  CHECK(f[3] < 0.0);

  const auto s = cli({"sigma", "--config", m10, "--test-config", p10, "--grid-n", "256"});
  REQUIRE(s.code == 0);
  CHECK(parse_number(last_line(s.out)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.out.find("--- test config ---") != std::string::npos);
}

TEST_CASE("sample is deterministic and honours --seed")
{
  TempDir d;
  const auto cfg = d.file("s.ini", "[sampling]\ncount = 3\nseed = 7\n");
  const auto a = cli({"sample", "--config", cfg});
  const auto b = cli({"sample", "--config", cfg});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto c = cli({"sample", "--config", cfg, "--seed", "8"});
  CHECK(c.out != a.out);
  CHECK(c.out.find("# seed = 8") != std::string::npos);
  std::istringstream rows(a.out);
  int data = 0;
  for (std::string line; std::getline(rows, line);)
    data += !line.empty() && line[0] != '#';
  CHECK(data == 4);

  for (const char* mode : {"batch", "passband"}) {
    const auto m = d.file(std::string(mode) + ".ini",
                          std::string("[sampling]\ncount = 2\nimages_per_batch = 3\nmode = ") +
                              mode + "\n");
    const auto r = cli({"sample", "--config", m});
    CHECK(r.code == 0);
  }
  CHECK(cli({"sample", "--config", d.file("x.ini", "[sampling]\nmode = other\n")}).code == 2);
}

TEST_CASE("emitted headers reproduce the output")
{
  TempDir d;
  const auto cfg = d.file("c.ini", "[aberrations]\ndefocus_nm = -4\nspherical_mm = 0.01\n"
                                   "[sampling]\ncount = 4\n");
  for (const char* cmd : {"sample", "epsilon", "passbands", "ctf-profile"}) {
    const auto first = cli({cmd, "--config", cfg, "--grid-n", "128", "--seed", "3"});
    REQUIRE(first.code == 0);
    const auto recovered = RunConfig::from_header(first.out);
    std::string text;
    for (const auto& l : recovered.resolved_lines())
      text += l + "\n";
    const auto again = cli({cmd, "--config", d.file(std::string(cmd) + ".ini", text)});
    REQUIRE(again.code == 0);
    CHECK_MESSAGE(again.out == first.out, cmd);
  }
}

TEST_CASE("map commands write tables of the configured shape")
{
  TempDir d;
  const auto cfg = d.file("m.ini", "[map]\ndefocus_count = 5\nspherical_count = 4\n"
                                   "train_defocus_count = 3\ntest_defocus_count = 6\npgm = true\n");
  const auto out = d.file("eps.csv");
  REQUIRE(cli({"map-epsilon", "--config", cfg, "--grid-n", "64", "--out", out}).code == 0);
  std::istringstream rows(read_text_file(out));
  int data = 0;
  for (std::string line; std::getline(rows, line);)
    if (!line.empty() && line[0] != '#') {
      ++data;
      CHECK(std::count(line.begin(), line.end(), ',') == 5);
    }
  CHECK(data == 5);
  CHECK(fs::exists(d.path / "eps.pgm"));
  CHECK(fs::exists(d.path / "eps.pgm.config.txt"));

  const auto base = d.file("shift.csv");
  const auto r = cli({"map-shift", "--config", cfg, "--grid-n", "64", "--out", base});
  REQUIRE(r.code == 0);
  for (const char* part : {"sigma", "delta_eps", "degenerate"})
    CHECK(fs::exists(d.path / ("shift." + std::string(part) + ".csv")));
  CHECK(cli({"map-shift", "--config", cfg}).code == 2);
}

TEST_CASE("simulate and calibrate")
{
  TempDir d;
  const auto cfg = d.file("p.ini", "[phantom]\nsize_px = 64\ncalibrate_half_width_nm = 2\n"
                                   "[microscope]\ndose_e_per_A2 = 300\n");
  const auto img = d.file("img.pgm");
  const auto a = cli({"simulate", "--config", cfg, "--out", img});
  REQUIRE(a.code == 0);
  CHECK(a.out.find("n_x,n_y,pixel_size_A,mean,std,min,max\n64,64,0.25,") == 0);
  CHECK(fs::exists(img + ".config.txt"));
  const auto raw = d.file("img.raw");
  REQUIRE(cli({"simulate", "--config", cfg, "--out", raw}).code == 0);
  CHECK(read_raw_f32(raw).n_x == 64);
  CHECK(cli({"simulate", "--config", cfg}).code == 2);

  const auto c = cli({"calibrate", "--config", cfg});
  REQUIRE(c.code == 0);
  CHECK(std::abs(fields(last_line(c.out))[0]) <= 0.1);
}

TEST_CASE("version and help")
{
  const auto v = cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(version_string) != std::string::npos);
  CHECK(cli({"--help"}).code == 0);
}
