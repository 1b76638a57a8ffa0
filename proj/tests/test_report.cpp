#include "forcefit/report.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace forcefit;

TEST(Summary, MeansAndFractions) {
  std::vector<EvalDelta> d{{"a", 4.0, -2.0, 0.1, 0.0}, {"b", 2.0, 1.0, -0.1, 0.2}, {"c", 1.0, -0.5, 0.0, 0.1},
                           {"d", 5.0, -1.0, 0.2, -0.1}};
  const EvalSummary s = summarize(d, 1);
  EXPECT_EQ(s.scenes, 4);
  EXPECT_EQ(s.skipped, 1);
  EXPECT_NEAR(s.meanDeltaMpjpe, -0.625, 1e-15);
  EXPECT_NEAR(s.meanRelativeMpjpeReduction, (0.5 - 0.5 + 0.5 + 0.2) / 4, 1e-15);
  EXPECT_EQ(s.fractionMpjpeImproved, 0.75);
  EXPECT_EQ(s.fractionPrAucImproved, 0.5);
  EXPECT_EQ(s.fractionRocAucImproved, 0.5);
  EXPECT_EQ(summarize({}, 0).scenes, 0);
}

TEST(Histogram, BinsCoverRange) {
  const auto h = histogram({0.0, 0.1, 0.5, 0.99, 1.0}, 4);
  ASSERT_EQ(h.size(), 4u);
  EXPECT_EQ(h.front().lo, 0.0);
  EXPECT_EQ(h.back().hi, 1.0);
  int total = 0;
  for (const auto& b : h) total += b.count;
  EXPECT_EQ(total, 5);
  EXPECT_EQ(h[0].count, 2);
  EXPECT_EQ(h[3].count, 2);
  const auto flat = histogram({2.0, 2.0}, 3);
  EXPECT_EQ(flat[1].count, 2);
  EXPECT_THROW(histogram({1.0}, 0), std::invalid_argument);
}

TEST(Csv, RowsAndSkips) {
  std::vector<EvalRow> rows{{"s1", "initial", MetricsReport{1.5, 0.5, 0.75}, ""}, {"s2", "initial", std::nullopt, "undefined AUC"}};
  const std::string csv = formatRowsCsv(rows);
  EXPECT_NE(csv.find("s1,initial,1.5,0.5,0.75,"), std::string::npos);
  EXPECT_NE(csv.find("s2,initial,,,,skipped: undefined AUC"), std::string::npos);
}

TEST(Curves, CsvMatchesContactModel) {
  const std::string csv = contactCurvesCsv({0.03, 0.002}, 0.5, -0.01, 0.01, 3);
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "d_mm,z_30mm,z_2mm");
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "0,0.5,0.5");
  const std::string svg = contactCurvesSvg({0.03, 0.002}, 0.5, -0.01, 0.01, 50);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("z = 2 mm"), std::string::npos);
  EXPECT_THROW(contactCurvesCsv({0.01}, 0.5, 0.0, 0.0, 10), std::invalid_argument);
}
