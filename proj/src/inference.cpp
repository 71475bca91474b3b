#include "moralmap/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <ostream>
#include <set>

#include "moralmap/format.hpp"
#include "moralmap/stats.hpp"

namespace moralmap {

std::string_view transform_name(Transform t) noexcept {
  switch (t) {
    case Transform::none: return "none";
    case Transform::log: return "log";
    case Transform::sqrt: return "sqrt";
  }
  return "none";
}

std::optional<Transform> parse_transform(std::string_view s) noexcept {
  if (s == "none") return Transform::none;
  if (s == "log") return Transform::log;
  if (s == "sqrt") return Transform::sqrt;
  return std::nullopt;
}

Transformed transform(std::span<const double> values, Transform kind, std::span<const std::string> ids) {
  Transformed out;
  out.values.assign(values.begin(), values.end());
  switch (kind) {
    case Transform::none: break;
    case Transform::log: {
      if (values.empty()) break;
      const double lo = *std::min_element(values.begin(), values.end());
      if (lo <= 0.0) out.shift = 1.0 - lo;
      for (double& v : out.values) v = std::log(v + out.shift.value_or(0.0));
      break;
    }
    case Transform::sqrt: {
      std::string bad;
      std::size_t n_bad = 0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= 0.0) continue;
        ++n_bad;
        if (!bad.empty()) bad += ", ";
        bad += i < ids.size() ? ids[i] : "#" + std::to_string(i);
      }
      if (n_bad > 0)
        throw DomainError("sqrt of negative values (" + std::to_string(n_bad) + "): " + bad);
      for (double& v : out.values) v = std::sqrt(v);
      break;
    }
  }
  return out;
}

std::vector<double> zscore(std::span<const double> values, Warnings* warnings) {
  if (values.size() < 2) throw DomainError("z-score needs at least two values");
  const double m = stats::mean(values);
  const double sd = stats::sample_sd(values);
  std::vector<double> out(values.size(), 0.0);
  if (stats::degenerate_spread(values, sd)) {
    warn(warnings, "zero-variance series standardized to zeros");
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - m) / sd;
  return out;
}

std::string Variable::label() const {
  if (transform == Transform::none) return name;
  return name + " (" + std::string(transform_name(transform)) + ")";
}

RegressionSpec RegressionSpec::standard() {
  RegressionSpec s;
  s.dependent = {"marker_fraction", Transform::none};
  s.predictors = {{"n_comments", Transform::log},     {"video_comment_alignment", Transform::log},
                  {"silhouette", Transform::log},     {"care", Transform::none},
                  {"fairness", Transform::sqrt},      {"loyalty", Transform::sqrt},
                  {"authority", Transform::sqrt},     {"sanctity", Transform::sqrt}};
  return s;
}

void RegressionSpec::validate() const {
  std::set<std::string> seen;
  const auto check = [&](const Variable& v) {
    if (v.name.empty()) throw ValidationError("regression variable with empty name");
    if (v.name == "const") throw ValidationError("'const' is reserved for the intercept");
    if (!seen.insert(v.name).second) throw ValidationError("duplicate regression variable '" + v.name + "'");
  };
  check(dependent);
  for (const auto& p : predictors) check(p);
}

RegressionResult ols_fit(const RegressionSpec& spec, const VariableTable& data, Warnings* warnings) {
  spec.validate();
  const std::size_t n = data.ids.size();
  const std::size_t p = spec.predictors.size() + (spec.include_intercept ? 1 : 0);
  if (p == 0) throw ValidationError("regression has no terms");
  if (n <= p) throw ValidationError("regression needs more observations (" + std::to_string(n) +
                                    ") than terms (" + std::to_string(p) + "); df <= 0");

  RegressionResult result;
  const auto prepare = [&](const Variable& v) {
    const auto it = data.columns.find(v.name);
    if (it == data.columns.end()) throw ValidationError("missing regression column '" + v.name + "'");
    if (it->second.size() != n) throw ValidationError("column '" + v.name + "' has wrong length");
    auto t = transform(it->second, v.transform, data.ids);
    if (t.shift) {
      result.log_shifts[v.name] = *t.shift;
      warn(warnings, "log of non-positive values in '" + v.name + "': shifted by " + format_double(*t.shift));
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(t.values[i]))
        throw ValidationError("non-finite value in '" + v.name + "' for " + data.ids[i]);
    return spec.standardize ? zscore(t.values, warnings) : t.values;
  };

  std::vector<std::string> names;
  Eigen::MatrixXd X(n, p);
  std::size_t col = 0;
  if (spec.include_intercept) {
    X.col(col++).setOnes();
    names.emplace_back("const");
  }
  for (const auto& v : spec.predictors) {
    const auto values = prepare(v);
    for (std::size_t i = 0; i < n; ++i) X(i, col) = values[i];
    ++col;
    names.push_back(v.label());
  }
  const auto yv = prepare(spec.dependent);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), static_cast<Eigen::Index>(n));

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (static_cast<std::size_t>(qr.rank()) < p) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(p); ++k) {
      if (!cols.empty()) cols += ", ";
      cols += names[static_cast<std::size_t>(perm(k))];
    }
    throw ValidationError("rank-deficient design; collinear columns: " + cols);
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * beta;
  const double rss = resid.squaredNorm();
  result.n = n;
  result.df = n - p;
  const double sigma2 = rss / static_cast<double>(result.df);

  // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorization.
  const Eigen::Index pi = static_cast<Eigen::Index>(p);
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(pi, pi).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(pi, pi));
  const Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
  const auto& perm = qr.colsPermutation().indices();

  const boost::math::students_t dist(static_cast<double>(result.df));
  for (std::size_t k = 0; k < p; ++k) {
    Coefficient c;
    c.name = names[k];
    c.estimate = beta(static_cast<Eigen::Index>(k));
    Eigen::Index pos = 0;
    while (perm(pos) != static_cast<Eigen::Index>(k)) ++pos;
    c.std_err = std::sqrt(sigma2 * cov_perm(pos, pos));
    if (c.std_err > 0.0) {
      c.t = c.estimate / c.std_err;
      c.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(c.t))), 0.0, 1.0);
    } else {
      c.t = c.estimate == 0.0 ? 0.0 : std::copysign(HUGE_VAL, c.estimate);
      c.p = c.estimate == 0.0 ? 1.0 : 0.0;
    }
    result.coefficients.push_back(std::move(c));
  }

  const double ybar = y.mean();
  const double tss = (y.array() - ybar).square().sum();
  result.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, spec.include_intercept ? 0.0 : -HUGE_VAL, 1.0) : 0.0;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  const auto& sv = svd.singularValues();
  result.condition_number = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : HUGE_VAL;
  return result;
}

std::string_view significance_flag(double p) noexcept {
  if (p <= 0.01) return "***";
  if (p <= 0.05) return "**";
  if (p <= 0.1) return "*";
  return "";
}

void write_regression(std::ostream& out, const RegressionResult& r) {
  out << "variable,coefficient,std_err,t,p,significance_flag\n";
  for (const auto& c : r.coefficients)
    out << c.name << ',' << format_double(c.estimate) << ',' << format_double(c.std_err) << ','
        << format_double(c.t) << ',' << format_double(c.p) << ',' << significance_flag(c.p) << '\n';
  out << "R2," << format_double(r.r_squared) << '\n';
  out << "n," << r.n << '\n';
}

}  // namespace moralmap
