#pragma once

#include "forcefit/contact.hpp"
#include "forcefit/eval.hpp"

#include <optional>
#include <string>
#include <vector>

namespace forcefit {

/// Metrics of one (scene, stage) pair; `metrics` is empty when the truth
/// map is degenerate, with the reason in `note`.
struct EvalRow {
  std::string scene;
  std::string stage;  // "initial" or "refined"
  std::optional<MetricsReport> metrics;
  std::string note;
};

/// Per scene change from initial to refined.
struct EvalDelta {
  std::string scene;
  double initialMpjpe = 0.0;
  double mpjpe = 0.0;  // refined - initial, mm
  double prAuc = 0.0;
  double rocAuc = 0.0;
};

struct EvalSummary {
  int scenes = 0;
  int skipped = 0;
  double meanDeltaMpjpe = 0.0;
  double meanRelativeMpjpeReduction = 0.0;
  double fractionMpjpeImproved = 0.0;
  double fractionPrAucImproved = 0.0;
  double fractionRocAucImproved = 0.0;
};

/// Metrics against `truth`; degenerate truth yields a row without metrics.
EvalRow evaluateRow(const std::string& scene, const std::string& stage, const SceneTrajectory& predicted,
                    const SceneTrajectory& truth, const ContactParams& contact);

EvalSummary summarize(const std::vector<EvalDelta>& deltas, int skipped);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

/// `bins` equal-width bins spanning [min, max] of the values (one bin of
/// width 1 around the value when they are all equal).
std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins);

std::string formatRowsCsv(const std::vector<EvalRow>& rows);
std::string formatDeltasCsv(const std::vector<EvalDelta>& deltas);
std::string formatHistogramCsv(const std::vector<HistogramBin>& mpjpe, const std::vector<HistogramBin>& prAuc);
std::string formatSummaryCsv(const EvalSummary& s);

/// p_c(d) for each width in `widths` over `points` distances in [dMin, dMax]:
/// a CSV with columns d_mm, then one column per width.
std::string contactCurvesCsv(const std::vector<double>& widths, double p0, double dMin, double dMax, int points);
/// The same family as a standalone SVG line plot.
std::string contactCurvesSvg(const std::vector<double>& widths, double p0, double dMin, double dMax, int points);

}  // namespace forcefit
