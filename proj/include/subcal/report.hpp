#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace subcal {

/// One sampled test vector in a margin check: margin = lhs - rhs, where the
/// inequality under test reads rhs <= lhs.
struct MarginRow {
  std::size_t id = 0;
  double norm2_sq = 0.0;
  double param = 0.0;  // r, t or x depending on the check; 0 when unused
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct MarginReport {
  std::string check;
  std::vector<MarginRow> rows;
  double slack = 0.0;
  double min_margin = 0.0;
  double median_margin = 0.0;
  bool pass = true;
  bool kernel_excluded = false;
  std::string note;

  /// Recomputes min/median and the PASS flag (min_margin >= -slack).
  void finalize();
  std::size_t worst_row() const;
};

/// Pointwise two-sided bound lower <= value <= upper.
struct BoundRow {
  double x = 0.0;
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  bool holds = true;
};

struct BoundReport {
  std::string check;
  std::vector<BoundRow> rows;
  bool pass = true;
  std::string note;

  void add(double x, double lower, double value, double upper, double rel_tol);
};

struct Curve {
  std::string id;
  std::vector<double> xs;
  std::vector<double> ys;
};

std::string margin_csv(const MarginReport& report);
std::string bound_csv(const BoundReport& report);
std::string curves_csv(const std::vector<Curve>& curves);

}  // namespace subcal
