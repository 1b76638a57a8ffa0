#pragma once

namespace forcefit {

struct ContactParams {
  double z = 0.002;  // curve width, meters
  double p0 = 0.5;   // contact probability at zero distance

  void validate() const;
};

/// Geometric interpolation of the contact width over epochs.
struct AnnealSchedule {
  double zStart = 0.030;
  double zEnd = 0.002;
  int epochs = 300;

  void validate() const;
};

/// p_c = sigmoid(-(6/z) d - ln(1/p0 - 1)); d < 0 is penetration.
double contactProbability(double d, const ContactParams& params);

/// d p_c / d d = -(6/z) p_c (1 - p_c).
double contactProbabilityDerivative(double d, const ContactParams& params);

/// z(e) = zStart * (zEnd / zStart)^(e / (epochs - 1)); zEnd when epochs == 1.
double annealedZ(int epoch, const AnnealSchedule& schedule);

/// Numerically stable logistic function.
double sigmoid(double x);

}  // namespace forcefit
