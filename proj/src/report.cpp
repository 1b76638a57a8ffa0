#include "forcefit/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace forcefit {

EvalRow evaluateRow(const std::string& scene, const std::string& stage, const SceneTrajectory& predicted,
                    const SceneTrajectory& truth, const ContactParams& contact) {
  EvalRow row{scene, stage, std::nullopt, ""};
  try {
    row.metrics = evaluateScene(predicted, truth, contact);
  } catch (const std::invalid_argument& e) {
    row.note = e.what();
  }
  return row;
}

EvalSummary summarize(const std::vector<EvalDelta>& deltas, int skipped) {
  EvalSummary s;
  s.scenes = static_cast<int>(deltas.size());
  s.skipped = skipped;
  if (deltas.empty()) return s;
  int mp = 0, pr = 0, roc = 0;
  for (const auto& d : deltas) {
    s.meanDeltaMpjpe += d.mpjpe;
    if (d.initialMpjpe > 0.0) s.meanRelativeMpjpeReduction += -d.mpjpe / d.initialMpjpe;
    mp += d.mpjpe < 0.0;
    pr += d.prAuc > 0.0;
    roc += d.rocAuc > 0.0;
  }
  const double n = static_cast<double>(deltas.size());
  s.meanDeltaMpjpe /= n;
  s.meanRelativeMpjpeReduction /= n;
  s.fractionMpjpeImproved = mp / n;
  s.fractionPrAucImproved = pr / n;
  s.fractionRocAucImproved = roc / n;
  return s;
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  std::vector<HistogramBin> out;
  if (values.empty()) return out;
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) out.push_back({lo + b * width, b + 1 == bins ? hi : lo + (b + 1) * width, 0});
  for (double v : values) {
    int b = static_cast<int>(std::floor((v - lo) / width));
    out[std::clamp(b, 0, bins - 1)].count++;
  }
  return out;
}

namespace {

std::ostringstream csvStream() {
  std::ostringstream out;
  out << std::setprecision(10);
  return out;
}

}  // namespace

std::string formatRowsCsv(const std::vector<EvalRow>& rows) {
  auto out = csvStream();
  out << "scene,stage,mpjpe_mm,pr_auc,roc_auc,note\n";
  for (const auto& r : rows) {
    out << r.scene << ',' << r.stage << ',';
    if (r.metrics) {
      out << r.metrics->mpjpe << ',' << r.metrics->prAuc << ',' << r.metrics->rocAuc << ',';
    } else {
      out << ",,,";
    }
    out << (r.metrics ? "" : "skipped: " + r.note) << '\n';
  }
  return out.str();
}

std::string formatDeltasCsv(const std::vector<EvalDelta>& deltas) {
  auto out = csvStream();
  out << "scene,delta_mpjpe_mm,delta_pr_auc,delta_roc_auc\n";
  for (const auto& d : deltas) out << d.scene << ',' << d.mpjpe << ',' << d.prAuc << ',' << d.rocAuc << '\n';
  return out.str();
}

std::string formatHistogramCsv(const std::vector<HistogramBin>& mpjpe, const std::vector<HistogramBin>& prAuc) {
  auto out = csvStream();
  out << "quantity,bin_lo,bin_hi,count\n";
  for (const auto& b : mpjpe) out << "delta_mpjpe_mm," << b.lo << ',' << b.hi << ',' << b.count << '\n';
  for (const auto& b : prAuc) out << "delta_pr_auc," << b.lo << ',' << b.hi << ',' << b.count << '\n';
  return out.str();
}

std::string formatSummaryCsv(const EvalSummary& s) {
  auto out = csvStream();
  out << "scenes,skipped,mean_delta_mpjpe_mm,mean_relative_mpjpe_reduction,fraction_mpjpe_improved,"
         "fraction_pr_auc_improved,fraction_roc_auc_improved\n";
  out << s.scenes << ',' << s.skipped << ',' << s.meanDeltaMpjpe << ',' << s.meanRelativeMpjpeReduction << ','
      << s.fractionMpjpeImproved << ',' << s.fractionPrAucImproved << ',' << s.fractionRocAucImproved << '\n';
  return out.str();
}

namespace {

std::vector<double> sampleDistances(double dMin, double dMax, int points) {
  if (points < 2 || !(dMax > dMin)) throw std::invalid_argument("curve needs at least 2 points on a nonempty range");
  std::vector<double> d(points);
  for (int k = 0; k < points; ++k) d[k] = dMin + (dMax - dMin) * k / (points - 1);
  return d;
}

}  // namespace

std::string contactCurvesCsv(const std::vector<double>& widths, double p0, double dMin, double dMax, int points) {
  const auto ds = sampleDistances(dMin, dMax, points);
  auto out = csvStream();
  out << "d_mm";
  for (double z : widths) out << ",z_" << z * 1000.0 << "mm";
  out << '\n';
  for (double d : ds) {
    out << d * 1000.0;
    for (double z : widths) out << ',' << contactProbability(d, ContactParams{z, p0});
    out << '\n';
  }
  return out.str();
}

std::string contactCurvesSvg(const std::vector<double>& widths, double p0, double dMin, double dMax, int points) {
  const auto ds = sampleDistances(dMin, dMax, points);
  const double w = 640, h = 400, left = 60, right = 150, top = 20, bottom = 50;
  auto x = [&](double d) { return left + (d - dMin) / (dMax - dMin) * (w - left - right); };
  auto y = [&](double p) { return top + (1.0 - p) * (h - top - bottom); };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};
  std::ostringstream out;
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << w - right << "\" y2=\"" << y(0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << left << "\" y2=\"" << y(1)
      << "\" stroke=\"black\"/>\n";
  for (double p : {0.0, 0.5, 1.0}) {
    out << "<text x=\"" << left - 8 << "\" y=\"" << y(p) + 4 << "\" font-size=\"12\" text-anchor=\"end\">" << p
        << "</text>\n";
  }
  for (double d : {dMin, 0.5 * (dMin + dMax), dMax}) {
    out << "<text x=\"" << x(d) << "\" y=\"" << y(0) + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
        << d * 1000.0 << "</text>\n";
  }
  out << "<text x=\"" << 0.5 * (left + w - right) << "\" y=\"" << h - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">distance d (mm)</text>\n";
  out << "<text x=\"15\" y=\"" << 0.5 * (top + h - bottom)
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 " << 0.5 * (top + h - bottom)
      << ")\">contact probability</text>\n";
  for (std::size_t k = 0; k < widths.size(); ++k) {
    const char* color = colors[k % 7];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (double d : ds) out << x(d) << ',' << y(contactProbability(d, ContactParams{widths[k], p0})) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << w - right + 10 << "\" y=\"" << top + 16 * (k + 1) << "\" font-size=\"12\" fill=\""
        << color << "\">z = " << widths[k] * 1000.0 << " mm</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace forcefit
