#include "monofit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace monofit {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void FittedConstantsReport::append(const FittedConstantsReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

const FittedConstant* FittedConstantsReport::find(const std::string& bound, int n) const {
  for (const auto& r : rows)
    if (r.bound == bound && (n < 0 || r.n == n)) return &r;
  return nullptr;
}

double spread(const std::vector<double>& values) {
  if (values.empty()) return 1.0;
  double lo = INFINITY, hi = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v <= 0.0) return INFINITY;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi / lo;
}

void FittedConstantsReport::mark_stability(double factor) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.lemma, r.bound}].push_back(r.fitted_constant);
  for (auto& r : rows) r.stable = spread(groups[{r.lemma, r.bound}]) <= factor;
}

bool FittedConstantsReport::all_stable() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.stable; });
}

nlohmann::json FittedConstantsReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{"lemma", r.lemma},
                          {"bound", r.bound},
                          {"n", r.n},
                          {"j_range", {r.j_lo, r.j_hi}},
                          {"fitted_constant", r.fitted_constant},
                          {"lower", r.lower},
                          {"stable", r.stable}};
    if (!r.note.empty()) row["note"] = r.note;
    out.push_back(std::move(row));
  }
  return out;
}

std::string FittedConstantsReport::to_csv() const {
  std::ostringstream os;
  os << "lemma,bound,n,j_lo,j_hi,fitted_constant,stable\n";
  for (const auto& r : rows)
    os << r.lemma << ',' << r.bound << ',' << r.n << ',' << r.j_lo << ',' << r.j_hi << ','
       << format_double(r.fitted_constant) << ',' << (r.stable ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace monofit
