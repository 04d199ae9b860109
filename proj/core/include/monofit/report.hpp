#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace monofit {

/// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double v);

/// One fitted constant: the grid extremum of the ratio of the two sides of a bound.
struct FittedConstant {
  std::string lemma;
  std::string bound;
  int n = 0;
  int j_lo = 0;
  int j_hi = 0;
  double fitted_constant = 0.0;
  /// True for lower bounds, where the fitted constant is a minimum.
  bool lower = false;
  bool stable = true;
  std::string note;
};

struct FittedConstantsReport {
  std::vector<FittedConstant> rows;

  void append(const FittedConstantsReport& other);
  const FittedConstant* find(const std::string& bound, int n = -1) const;

  /// Groups rows by (lemma, bound) and marks them stable when max/min <= factor
  /// and every value is finite and positive.
  void mark_stability(double factor);
  bool all_stable() const;

  nlohmann::json to_json() const;
  /// Columns: lemma,bound,n,j_lo,j_hi,fitted_constant,stable.
  std::string to_csv() const;
};

/// max/min over positive finite values; infinity when any value is not.
double spread(const std::vector<double>& values);

}  // namespace monofit
