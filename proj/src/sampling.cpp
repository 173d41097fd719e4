#include "ctfkit/sampling.hpp"

#include "ctfkit/io.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ctfkit {

void SamplingSpec::validate() const
{
  for (Length l : {defocus_max, astig2_max, coma_max, astig3_max, spherical_max})
    if (!(l.in_angstrom() >= 0.0))
      throw std::invalid_argument("sampling maxima must be >= 0");
  if (!(jitter_fraction >= 0.0 && jitter_fraction <= 1.0))
    throw std::invalid_argument("jitter fraction must lie in [0, 1]");
  if (!(rotation_max >= 0.0) || !(rotation_jitter_std >= 0.0))
    throw std::invalid_argument("rotation parameters must be >= 0");
  if (!(reduced_scale >= 0.0))
    throw std::invalid_argument("reduced scale must be >= 0");
}

namespace {

Length uniform_length(Rng& rng, Length max)
{
  return Length::angstrom(rng.uniform(0.0, max.in_angstrom()));
}

Length jitter_length(Rng& rng, Length mean, Length max, double fraction)
{
  const double std = max.in_angstrom() * fraction;
  return Length::angstrom(mean.in_angstrom() + std * rng.normal());
}

} // namespace

PhysicalAberrations sample_target_condition(const SamplingSpec& spec, Rng& rng)
{
  spec.validate();
  PhysicalAberrations p;
  p.defocus = uniform_length(rng, spec.defocus_max);
  p.astig2.magnitude = uniform_length(rng, spec.astig2_max);
  p.astig2.angle = rng.uniform(0.0, spec.rotation_max);
  p.coma.magnitude = uniform_length(rng, spec.coma_max);
  p.coma.angle = rng.uniform(0.0, spec.rotation_max);
  p.astig3.magnitude = uniform_length(rng, spec.astig3_max);
  p.astig3.angle = rng.uniform(0.0, spec.rotation_max);
  p.spherical = uniform_length(rng, spec.spherical_max);
  return p;
}

PhysicalAberrations sample_target_condition(const SamplingSpec& spec,
                                            std::uint64_t index)
{
  Rng rng = Rng::substream(spec.seed, streams::target, index);
  return sample_target_condition(spec, rng);
}

PhysicalAberrations jitter_condition(const PhysicalAberrations& target,
                                     const SamplingSpec& spec, Rng& rng)
{
  spec.validate();
  const double f = spec.jitter_fraction;
  const double rs = spec.rotation_jitter_std;
  PhysicalAberrations p;
  p.defocus = jitter_length(rng, target.defocus, spec.defocus_max, f);
  p.astig2.magnitude =
      jitter_length(rng, target.astig2.magnitude, spec.astig2_max, f);
  p.astig2.angle = target.astig2.angle + rs * rng.normal();
  p.coma.magnitude = jitter_length(rng, target.coma.magnitude, spec.coma_max, f);
  p.coma.angle = target.coma.angle + rs * rng.normal();
  p.astig3.magnitude =
      jitter_length(rng, target.astig3.magnitude, spec.astig3_max, f);
  p.astig3.angle = target.astig3.angle + rs * rng.normal();
  p.spherical = jitter_length(rng, target.spherical, spec.spherical_max, f);
  return p;
}

void PassbandSpec::validate() const
{
  if (orders.empty())
    throw std::invalid_argument("passband orders must not be empty");
  for (double n : orders)
    if (!(n > 0.0) || !std::isfinite(n))
      throw std::invalid_argument("passband orders must be positive");
  if (points < 2)
    throw std::invalid_argument("passband points must be >= 2");
  if (!(spherical_min.in_angstrom() > 0.0) ||
      !(spherical_cap.in_angstrom() > 0.0) ||
      !(defocus_cap.in_angstrom() > 0.0))
    throw std::invalid_argument("passband bounds must be positive");
}

Length PassbandSpec::spherical_max(double order, double lambda) const
{
  const double df = defocus_cap.in_angstrom();
  return Length::angstrom(
      std::min(spherical_cap.in_angstrom(), df * df / (lambda * order)));
}

PassbandSet passband_conditions(const PassbandSpec& spec, double lambda)
{
  spec.validate();
  if (!(lambda > 0.0))
    throw std::invalid_argument("wavelength must be positive");

  PassbandSet out;
  for (double order : spec.orders) {
    const double lo = spec.spherical_min.in_angstrom();
    const double hi = spec.spherical_max(order, lambda).in_angstrom();
    if (!(hi >= lo)) {
      out.empty_orders.push_back(order);
      continue;
    }
    const double step = (hi - lo) / double(spec.points - 1);
    for (std::size_t k = 0; k < spec.points; ++k) {
      const double cs = k + 1 == spec.points ? hi : lo + step * double(k);
      PassbandPair p;
      p.order = order;
      p.spherical = Length::angstrom(cs);
      p.defocus = Length::angstrom(-std::sqrt(order * lambda * cs));
      out.pairs.push_back(p);
    }
  }
  return out;
}

PhysicalAberrations sample_passband_condition(const PassbandPair& pair,
                                              const SamplingSpec& spec,
                                              Rng& rng)
{
  spec.validate();
  const double s = spec.reduced_scale;
  PhysicalAberrations p;
  p.defocus = pair.defocus;
  p.astig2.magnitude = uniform_length(rng, spec.astig2_max * s);
  p.astig2.angle = rng.uniform(0.0, spec.rotation_max);
  p.coma.magnitude = uniform_length(rng, spec.coma_max * s);
  p.coma.angle = rng.uniform(0.0, spec.rotation_max);
  p.astig3.magnitude = uniform_length(rng, spec.astig3_max * s);
  p.astig3.angle = rng.uniform(0.0, spec.rotation_max);
  p.spherical = pair.spherical;
  return p;
}

namespace {

constexpr const char* conditions_header =
    "defocus_nm,astig2_nm,astig2_ang,coma_um,coma_ang,astig3_um,astig3_ang,"
    "spherical_mm,seed,index";

} // namespace

void write_conditions_csv(std::ostream& os,
                          const std::vector<ConditionRecord>& rows)
{
  os << conditions_header << '\n';
  for (const auto& r : rows) {
    const auto& a = r.ab;
    os << format_number(a.defocus.in_nm()) << ','
       << format_number(a.astig2.magnitude.in_nm()) << ','
       << format_number(a.astig2.angle) << ','
       << format_number(a.coma.magnitude.in_um()) << ','
       << format_number(a.coma.angle) << ','
       << format_number(a.astig3.magnitude.in_um()) << ','
       << format_number(a.astig3.angle) << ','
       << format_number(a.spherical.in_mm()) << ',' << r.seed << ','
       << r.index << '\n';
  }
}

std::vector<ConditionRecord> read_conditions_csv(std::istream& is)
{
  std::vector<ConditionRecord> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    if (!header_seen) {
      if (line != conditions_header)
        throw std::invalid_argument("unexpected conditions header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (cells.size() != 10)
      throw std::invalid_argument("conditions row needs 10 columns: " + line);
    ConditionRecord r;
    r.ab.defocus = Length::nm(parse_number(cells[0]));
    r.ab.astig2 = {Length::nm(parse_number(cells[1])), parse_number(cells[2])};
    r.ab.coma = {Length::um(parse_number(cells[3])), parse_number(cells[4])};
    r.ab.astig3 = {Length::um(parse_number(cells[5])), parse_number(cells[6])};
    r.ab.spherical = Length::mm(parse_number(cells[7]));
    r.seed = std::stoull(cells[8]);
    r.index = std::stoull(cells[9]);
    rows.push_back(r);
  }
  return rows;
}

} // namespace ctfkit
