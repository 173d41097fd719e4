#include "ctfkit/error.hpp"

#include <sstream>

namespace ctfkit {

namespace {

std::string degenerate_message(double overlap, double training, double floor)
{
  std::ostringstream os;
  os << "degenerate training transfer: integral |T|^2 = " << training
     << " below floor " << floor << " (overlap integral " << overlap << ")";
  return os.str();
}

} // namespace

DegenerateTraining::DegenerateTraining(double overlap_integral,
                                       double training_integral, double floor)
  : Error(degenerate_message(overlap_integral, training_integral, floor)),
    m_overlap(overlap_integral),
    m_training(training_integral),
    m_floor(floor)
{
}

} // namespace ctfkit
