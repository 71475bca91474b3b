#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moralmap/error.hpp"

namespace moralmap {

enum class Transform { none, log, sqrt };

std::string_view transform_name(Transform t) noexcept;
std::optional<Transform> parse_transform(std::string_view s) noexcept;

struct Transformed {
  std::vector<double> values;
  std::optional<double> shift;  // set when log needed x - min + 1
};

/// Natural log (shifting the series to a minimum of 1 when it has
/// non-positive values) or square root. `ids`, when given, name the
/// offending entries in the DomainError raised for negative sqrt input.
Transformed transform(std::span<const double> values, Transform kind,
                      std::span<const std::string> ids = {});

/// (x - mean) / sample sd. Throws DomainError for fewer than two values;
/// a constant series becomes zeros with a warning.
std::vector<double> zscore(std::span<const double> values, Warnings* warnings = nullptr);

struct Variable {
  std::string name;
  Transform transform = Transform::none;

  /// Row label in result tables, e.g. "loyalty (sqrt)".
  std::string label() const;
};

struct RegressionSpec {
  Variable dependent;
  std::vector<Variable> predictors;
  bool include_intercept = true;
  bool standardize = true;  // z-score every variable after its transform

  /// marker_fraction on comment count, alignment, silhouette and the five
  /// moral dimensions, all standardized.
  static RegressionSpec standard();
  /// Throws ValidationError on duplicate or empty names.
  void validate() const;
};

/// Columns keyed by variable name; every column has one value per id.
struct VariableTable {
  std::vector<std::string> ids;
  std::map<std::string, std::vector<double>> columns;
};

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_err = 0.0;
  double t = 0.0;
  double p = 1.0;
};

struct RegressionResult {
  std::vector<Coefficient> coefficients;  // intercept first, named "const"
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t df = 0;
  double condition_number = 0.0;
  std::map<std::string, double> log_shifts;  // variable -> shift applied
};

/// Ordinary least squares with classical standard errors and two-sided
/// Student-t p-values (df = n - p). Throws ValidationError when a column is
/// missing, non-finite values remain, df <= 0 or the design is rank
/// deficient (naming the collinear columns).
RegressionResult ols_fit(const RegressionSpec& spec, const VariableTable& data,
                         Warnings* warnings = nullptr);

/// "***" for p <= 0.01, "**" for p <= 0.05, "*" for p <= 0.1, else "".
std::string_view significance_flag(double p) noexcept;

/// variable,coefficient,std_err,t,p,significance_flag then R2 and n rows.
void write_regression(std::ostream& out, const RegressionResult& result);

}  // namespace moralmap
