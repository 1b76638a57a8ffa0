#include "forcefit/contact.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace forcefit {

void ContactParams::validate() const {
  if (!(z > 0.0)) throw std::invalid_argument("contact width z must be positive");
  if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("p0 must lie in (0, 1)");
}

void AnnealSchedule::validate() const {
  if (!(zEnd > 0.0) || !(zStart >= zEnd)) {
    throw std::invalid_argument("anneal schedule needs zStart >= zEnd > 0");
  }
  if (epochs < 1) throw std::invalid_argument("anneal schedule needs at least one epoch");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double contactProbability(double d, const ContactParams& params) {
  // Same sigmoid written as p0 / (p0 + (1 - p0) e^(6d/z)); exact p0 at d = 0
  // and no overflow for large |d|.
  const double e = std::exp((6.0 / params.z) * d);
  return params.p0 / (params.p0 + (1.0 - params.p0) * e);
}

double contactProbabilityDerivative(double d, const ContactParams& params) {
  const double p = contactProbability(d, params);
  return -(6.0 / params.z) * p * (1.0 - p);
}

double annealedZ(int epoch, const AnnealSchedule& schedule) {
  schedule.validate();
  if (epoch < 0 || epoch >= schedule.epochs) {
    throw std::out_of_range("epoch " + std::to_string(epoch) + " outside the schedule");
  }
  if (schedule.epochs == 1) return schedule.zEnd;
  if (epoch == schedule.epochs - 1) return schedule.zEnd;
  const double frac = static_cast<double>(epoch) / (schedule.epochs - 1);
  return schedule.zStart * std::pow(schedule.zEnd / schedule.zStart, frac);
}

}  // namespace forcefit
