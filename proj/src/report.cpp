#include "subcal/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "subcal/numerics.hpp"

namespace subcal {

void MarginReport::finalize() {
  if (rows.empty()) {
    min_margin = kInf;
    median_margin = kInf;
    pass = true;
    return;
  }
  std::vector<double> m;
  m.reserve(rows.size());
  for (const auto& r : rows) m.push_back(r.margin);
  min_margin = *std::min_element(m.begin(), m.end());
  median_margin = median(m);
  pass = !std::isnan(min_margin) && min_margin >= -slack;
}

std::size_t MarginReport::worst_row() const {
  std::size_t k = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].margin < rows[k].margin) k = i;
  }
  return k;
}

void BoundReport::add(double x, double lower, double value, double upper, double rel_tol) {
  auto le = [rel_tol](double p, double q) {
    if (std::isinf(q) && q > 0) return true;
    return p <= q + rel_tol * std::max(std::abs(p), std::abs(q));
  };
  const bool ok = le(lower, value) && le(value, upper);
  rows.push_back(BoundRow{x, lower, value, upper, ok});
  pass = pass && ok;
}

std::string margin_csv(const MarginReport& report) {
  std::ostringstream os;
  os << "id,norm2_sq,param,lhs,rhs,margin\n";
  for (const auto& r : report.rows) {
    os << r.id << ',' << format_double(r.norm2_sq) << ',' << format_double(r.param) << ','
       << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.margin)
       << '\n';
  }
  return os.str();
}

std::string bound_csv(const BoundReport& report) {
  std::ostringstream os;
  os << "x,lower,value,upper,holds\n";
  for (const auto& r : report.rows) {
    os << format_double(r.x) << ',' << format_double(r.lower) << ',' << format_double(r.value)
       << ',' << format_double(r.upper) << ',' << (r.holds ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string curves_csv(const std::vector<Curve>& curves) {
  std::ostringstream os;
  os << "curve_id,x,value\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
      os << c.id << ',' << format_double(c.xs[i]) << ',' << format_double(c.ys[i]) << '\n';
    }
  }
  return os.str();
}

}  // namespace subcal
