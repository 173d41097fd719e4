// ctfkit/error.hpp

#pragma once

#include <stdexcept>
#include <string>

namespace ctfkit {

/// Base for all library errors. Plain std::invalid_argument is used for
/// precondition violations on direct API calls.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

class NumericError : public Error
{
public:
  using Error::Error;
};

/// The training transfer function carries (numerically) no information, so
/// the overlap ratio is undefined. Carries the raw integrals for diagnostics.
class DegenerateTraining : public Error
{
public:
  DegenerateTraining(double overlap_integral, double training_integral,
                     double floor);

  double overlap_integral() const { return m_overlap; }
  double training_integral() const { return m_training; }
  double floor() const { return m_floor; }

private:
  double m_overlap;
  double m_training;
  double m_floor;
};

/// Raised for an epsilon whose envelope integral vanishes.
class DegenerateEnvelope : public Error
{
public:
  using Error::Error;
};

} // namespace ctfkit
