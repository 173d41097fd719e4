#include "ctfkit/maps.hpp"

#include "ctfkit/error.hpp"
#include "ctfkit/io.hpp"
#include "ctfkit/parallel.hpp"
#include "ctfkit/transfer.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace ctfkit {

void MapAxis::validate(const std::string& name) const
{
  if (count < 2)
    throw std::invalid_argument("axis " + name + " needs at least 2 points");
  if (!(min < max))
    throw std::invalid_argument("axis " + name + " needs min < max");
}

std::vector<double> MapAxis::values() const
{
  std::vector<double> v(count);
  const double step = (max - min) / double(count - 1);
  for (std::size_t k = 0; k < count; ++k)
    v[k] = k + 1 == count ? max : min + step * double(k);
  // Snap values that should be zero but carry rounding noise.
  for (double& x : v)
    if (std::abs(x) < 1e-12 * std::max(std::abs(min), std::abs(max)))
      x = 0.0;
  return v;
}

namespace {

NodeLayout layout_for(const AberrationSet& ab, const FrequencyGrid& grid)
{
  return preferred_layout(ab, grid);
}

} // namespace

EpsilonMap epsilon_map(const EpsilonMapSpec& spec)
{
  spec.defocus_nm.validate("defocus");
  spec.spherical_mm.validate("spherical");

  EpsilonMap out;
  out.defocus_nm = spec.defocus_nm.values();
  out.spherical_mm = spec.spherical_mm.values();
  const GridPtr grid = spec.policy.make_grid(spec.config);
  out.grid_n = grid->n_x();
  out.grid_q_max = grid->q_max();

  const std::size_t rows = out.spherical_mm.size();
  const std::size_t cols = out.defocus_nm.size();
  out.epsilon = Table{rows, cols, std::vector<double>(rows * cols, 0.0)};

  parallel_for_each(rows * cols, [&](std::size_t cell) {
    const std::size_t r = cell / cols;
    const std::size_t c = cell % cols;
    PhysicalAberrations p = spec.fixed;
    p.defocus = Length::nm(out.defocus_nm[c]);
    p.spherical = Length::mm(out.spherical_mm[r]);
    const AberrationSet ab = from_physical(p, spec.config.lambda);
    try {
      const auto t = transfer_abs(ab, spec.config, grid, layout_for(ab, *grid));
      out.epsilon.at(r, c) = epsilon(t);
    } catch (const DegenerateEnvelope& e) {
      throw DegenerateEnvelope(std::string(e.what()) + " at defocus_nm=" +
                               format_number(out.defocus_nm[c]) +
                               ", spherical_mm=" +
                               format_number(out.spherical_mm[r]));
    }
  });
  return out;
}

ShiftMap shift_map(const ShiftMapSpec& spec)
{
  spec.train_defocus_nm.validate("train_defocus");
  spec.test_defocus_nm.validate("test_defocus");

  ShiftMap out;
  out.train_defocus_nm = spec.train_defocus_nm.values();
  out.test_defocus_nm = spec.test_defocus_nm.values();
  const GridPtr grid = spec.policy.make_grid(spec.config);
  out.grid_n = grid->n_x();
  out.grid_q_max = grid->q_max();

  auto set_for = [&](double defocus_nm) {
    PhysicalAberrations p = spec.fixed;
    p.defocus = Length::nm(defocus_nm);
    return from_physical(p, spec.config.lambda);
  };

  // Every condition on one shared layout so any pair can be compared.
  const AberrationSet probe = set_for(1.0);
  const NodeLayout layout = layout_for(probe, *grid);

  auto build = [&](const std::vector<double>& axis) {
    std::vector<std::optional<TransferSample>> samples(axis.size());
    parallel_for_each(axis.size(), [&](std::size_t k) {
      samples[k].emplace(transfer_abs(set_for(axis[k]), spec.config, grid, layout));
    });
    return samples;
  };
  const auto train = build(out.train_defocus_nm);
  const auto test = build(out.test_defocus_nm);

  out.eps_train.resize(train.size());
  out.eps_test.resize(test.size());
  for (std::size_t k = 0; k < train.size(); ++k)
    out.eps_train[k] = epsilon(*train[k]);
  for (std::size_t k = 0; k < test.size(); ++k)
    out.eps_test[k] = epsilon(*test[k]);

  const std::size_t rows = train.size();
  const std::size_t cols = test.size();
  out.sigma = Table{rows, cols, std::vector<double>(rows * cols, 0.0)};
  out.delta_eps = out.sigma;
  out.degenerate = out.sigma;

  parallel_for_each(rows * cols, [&](std::size_t cell) {
    const std::size_t r = cell / cols;
    const std::size_t c = cell % cols;
    out.delta_eps.at(r, c) = out.eps_test[c] - out.eps_train[r];
    try {
      out.sigma.at(r, c) = sigma(*train[r], *test[c]);
    } catch (const DegenerateTraining&) {
      out.sigma.at(r, c) = std::numeric_limits<double>::quiet_NaN();
      out.degenerate.at(r, c) = 1.0;
    }
  });
  return out;
}

std::vector<ProfileRow> ctf_profile(const AberrationSet& ab,
                                    const MicroscopeConfig& config,
                                    const std::vector<double>& q)
{
  if (q.size() < 2)
    throw std::invalid_argument("profile needs at least 2 samples");
  for (std::size_t k = 1; k < q.size(); ++k)
    if (!(q[k] > q[k - 1]))
      throw std::invalid_argument("profile samples must be ascending");

  const ChiEvaluator chi_of(ab, config.lambda);
  std::vector<ProfileRow> rows(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double e = envelope_at(config, q[k]);
    const double a = aperture_at(config, q[k]);
    rows[k] = {q[k], e * a * std::abs(std::sin(chi_of(q[k], 0.0))), e};
  }
  return rows;
}

void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                     const std::string& corner,
                     const std::vector<double>& row_values,
                     const std::vector<double>& col_values, const Table& t)
{
  for (const auto& h : header)
    os << "# " << h << '\n';
  os << corner;
  for (double c : col_values)
    os << ',' << format_number(c);
  os << '\n';
  for (std::size_t r = 0; r < t.rows; ++r) {
    os << format_number(row_values[r]);
    for (std::size_t c = 0; c < t.cols; ++c)
      os << ',' << format_number(t.at(r, c));
    os << '\n';
  }
}

void write_profile_csv(std::ostream& os, const std::vector<std::string>& header,
                       const std::vector<ProfileRow>& rows)
{
  for (const auto& h : header)
    os << "# " << h << '\n';
  os << "q_inv_A,t_abs,envelope\n";
  for (const auto& r : rows)
    os << format_number(r.q) << ',' << format_number(r.t_abs) << ','
       << format_number(r.env) << '\n';
}

} // namespace ctfkit
