#pragma once

// Ordinary least squares with categorical fixed effects, HC1 robust standard
// errors, variance inflation factors and predicted margins.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "stylo/error.hpp"
#include "stylo/io.hpp"
#include "stylo/parallel.hpp"
#include "stylo/table.hpp"

namespace stylo {

inline constexpr std::string_view kInterceptName = "(Intercept)";

struct ModelSpec {
  std::string outcome;
  std::vector<std::string> predictors;
  std::vector<std::string> fixed_effects;
  bool robust = true;  // HC1 when true, classical OLS errors otherwise

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_terms(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    auto term = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!term.empty()) out.push_back(std::move(term));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_bool(std::string_view v, std::string_view what) {
  const std::string s = ascii_lower(trim(v));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw SpecError("invalid boolean for " + std::string(what) + ": '" + std::string(v) + "'");
}

}  // namespace detail

// "outcome ~ x1 + x2 | fe1 + fe2". The right side may be "1" for an
// intercept-only model.
inline ModelSpec parse_formula(std::string_view formula) {
  const auto tilde = formula.find('~');
  if (tilde == std::string_view::npos) throw SpecError("formula needs '~': " + std::string(formula));
  ModelSpec spec;
  spec.outcome = detail::trim(formula.substr(0, tilde));
  if (spec.outcome.empty()) throw SpecError("formula has no outcome");
  std::string_view rhs = formula.substr(tilde + 1);
  const auto bar = rhs.find('|');
  for (auto& t : detail::split_terms(rhs.substr(0, bar), '+'))
    if (t != "1") spec.predictors.push_back(std::move(t));
  if (bar != std::string_view::npos) spec.fixed_effects = detail::split_terms(rhs.substr(bar + 1), '+');
  return spec;
}

// Key-value form, one setting per line ('#' starts a comment):
//   outcome = ratio
//   predictors = female, lawyer_female
//   fixed_effects = field, year
//   robust = true
// A line "formula = ..." may replace the first three keys.
inline ModelSpec parse_spec_text(std::string_view text) {
  if (text.find('=') == std::string_view::npos && text.find('~') != std::string_view::npos)
    return parse_formula(detail::trim(text));
  ModelSpec spec;
  bool have_formula = false;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    const std::string line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SpecError("spec line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::ascii_lower(detail::trim(line.substr(0, eq)));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "formula") {
      const bool robust = spec.robust;
      spec = parse_formula(value);
      spec.robust = robust;
      have_formula = true;
    } else if (key == "outcome") {
      spec.outcome = value;
    } else if (key == "predictors") {
      spec.predictors = detail::split_terms(value, ',');
    } else if (key == "fixed_effects") {
      spec.fixed_effects = detail::split_terms(value, ',');
    } else if (key == "robust") {
      spec.robust = detail::parse_bool(value, "robust");
    } else {
      throw SpecError("unknown spec key '" + key + "'");
    }
  }
  if (spec.outcome.empty() && !have_formula) throw SpecError("spec has no outcome");
  return spec;
}

inline std::string to_formula(const ModelSpec& spec) {
  std::string f = spec.outcome + " ~ ";
  if (spec.predictors.empty()) f += "1";
  for (std::size_t i = 0; i < spec.predictors.size(); ++i) f += (i ? " + " : "") + spec.predictors[i];
  if (!spec.fixed_effects.empty()) {
    f += " | ";
    for (std::size_t i = 0; i < spec.fixed_effects.size(); ++i) f += (i ? " + " : "") + spec.fixed_effects[i];
  }
  return f;
}

// ---------------------------------------------------------------- design

struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> names;     // column names; intercept first
  std::vector<std::size_t> rows;      // table rows used
  std::size_t n_dropped_missing = 0;  // rows with a missing value in a used column
  std::map<std::string, std::string> reference_levels;
};

inline void validate_spec(const ModelSpec& spec, const Table& data) {
  if (spec.outcome.empty()) throw SpecError("model has no outcome");
  std::set<std::string> seen;
  for (const auto& p : spec.predictors) {
    if (p == spec.outcome) throw SpecError("outcome '" + p + "' is also a predictor");
    if (!seen.insert(p).second) throw SpecError("predictor '" + p + "' listed twice");
  }
  for (const auto& f : spec.fixed_effects) {
    if (f == spec.outcome) throw SpecError("outcome '" + f + "' is also a fixed effect");
    if (!seen.insert(f).second) throw SpecError("column '" + f + "' used twice");
  }
  data.index(spec.outcome);
  for (const auto& p : spec.predictors) data.index(p);
  for (const auto& f : spec.fixed_effects) data.index(f);
}

// Builds the design matrix: intercept, numeric predictors, then one dummy per
// non-reference level of each fixed effect ("field=bio"). The reference is
// the alphabetically first level. Rows missing any used value are dropped.
inline Design build_design(const Table& data, const ModelSpec& spec) {
  validate_spec(spec, data);
  const auto y_all = data.numeric(spec.outcome);
  std::vector<std::vector<double>> preds;
  for (const auto& p : spec.predictors) preds.push_back(data.numeric(p));
  std::vector<const std::vector<std::string>*> fes;
  for (const auto& f : spec.fixed_effects) fes.push_back(&data.column(f));

  Design d;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    bool ok = !std::isnan(y_all[r]);
    for (const auto& p : preds) ok = ok && !std::isnan(p[r]);
    for (const auto* f : fes) ok = ok && !Table::is_missing((*f)[r]);
    if (ok)
      d.rows.push_back(r);
    else
      ++d.n_dropped_missing;
  }
  std::vector<std::vector<std::string>> levels(fes.size());
  std::size_t k = 1 + preds.size();
  for (std::size_t j = 0; j < fes.size(); ++j) {
    std::set<std::string> lv;
    for (auto r : d.rows) lv.insert((*fes[j])[r]);
    levels[j].assign(lv.begin(), lv.end());
    if (!levels[j].empty()) {
      d.reference_levels[spec.fixed_effects[j]] = levels[j].front();
      k += levels[j].size() - 1;
    }
  }
  const auto n = static_cast<Eigen::Index>(d.rows.size());
  d.X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k));
  d.y.resize(n);
  d.names.emplace_back(kInterceptName);
  for (const auto& p : spec.predictors) d.names.push_back(p);
  std::vector<std::map<std::string, Eigen::Index, std::less<>>> dummy_col(fes.size());
  Eigen::Index col = static_cast<Eigen::Index>(1 + preds.size());
  for (std::size_t j = 0; j < fes.size(); ++j)
    for (std::size_t l = 1; l < levels[j].size(); ++l) {
      dummy_col[j][levels[j][l]] = col++;
      d.names.push_back(spec.fixed_effects[j] + "=" + levels[j][l]);
    }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = d.rows[static_cast<std::size_t>(i)];
    d.y(i) = y_all[r];
    d.X(i, 0) = 1.0;
    for (std::size_t p = 0; p < preds.size(); ++p) d.X(i, static_cast<Eigen::Index>(1 + p)) = preds[p][r];
    for (std::size_t j = 0; j < fes.size(); ++j)
      if (auto it = dummy_col[j].find((*fes[j])[r]); it != dummy_col[j].end()) d.X(i, it->second) = 1.0;
  }
  return d;
}

// ---------------------------------------------------------------- fit

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double p_value = 1.0;
};

struct RegressionResult {
  ModelSpec spec;
  std::vector<Coefficient> coefficients;  // design order; intercept first
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t dof = 0;
  std::size_t n_dropped_missing = 0;
  std::string se_type;
  std::map<std::string, double> vifs;  // numeric predictors only
  std::vector<double> fitted;
  std::vector<double> residuals;
  std::vector<double> design_means;  // column means of the design matrix
  std::vector<bool> binary;          // design column takes only values 0 and 1
  std::map<std::string, std::string> reference_levels;

  const Coefficient& at(std::string_view name) const {
    for (const auto& c : coefficients)
      if (c.name == name) return c;
    throw SpecError("no coefficient named '" + std::string(name) + "'");
  }
  std::size_t position(std::string_view name) const {
    for (std::size_t i = 0; i < coefficients.size(); ++i)
      if (coefficients[i].name == name) return i;
    throw SpecError("no coefficient named '" + std::string(name) + "'");
  }
  std::map<std::string, double> coefficient_map() const {
    std::map<std::string, double> m;
    for (const auto& c : coefficients) m[c.name] = c.estimate;
    return m;
  }
  std::map<std::string, double> std_error_map() const {
    std::map<std::string, double> m;
    for (const auto& c : coefficients) m[c.name] = c.std_error;
    return m;
  }
  std::map<std::string, double> p_value_map() const {
    std::map<std::string, double> m;
    for (const auto& c : coefficients) m[c.name] = c.p_value;
    return m;
  }
};

namespace detail {

// Columns scaled to unit norm before factorization so rank decisions do not
// depend on units.
struct ScaledQr {
  Eigen::VectorXd scale;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;

  explicit ScaledQr(const Eigen::MatrixXd& X) : scale(X.cols()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double norm = X.col(j).norm();
      scale(j) = norm > 0.0 ? 1.0 / norm : 1.0;
    }
    qr.setThreshold(1e-10);
    qr.compute(X * scale.asDiagonal());
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& y) const { return scale.asDiagonal() * qr.solve(y); }
};

// Names of columns that are linear combinations of earlier columns.
inline std::vector<std::string> collinear_columns(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
    for (std::size_t c = 0; c < kept.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = X.col(kept[c]);
    sub.col(sub.cols() - 1) = X.col(j);
    if (ScaledQr(sub).qr.rank() == sub.cols())
      kept.push_back(j);
    else
      out.push_back(names[static_cast<std::size_t>(j)]);
  }
  return out;
}

inline double centered_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& resid) {
  const double mean = y.mean();
  const double tss = (y.array() - mean).square().sum();
  if (tss <= 0.0) return 0.0;
  return 1.0 - resid.squaredNorm() / tss;
}

// VIF of column j regressed on every other design column. Returns +inf when
// column j is (numerically) an exact combination of the others.
inline double vif_of_column(const Eigen::MatrixXd& X, Eigen::Index j) {
  const Eigen::VectorXd target = X.col(j);
  const double mean = target.mean();
  const double tss = (target.array() - mean).square().sum();
  if (tss <= 0.0) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd others(X.rows(), X.cols() - 1);
  for (Eigen::Index c = 0, o = 0; c < X.cols(); ++c)
    if (c != j) others.col(o++) = X.col(c);
  const ScaledQr qr(others);
  const Eigen::VectorXd resid = target - others * qr.solve(target);
  const double ssr = resid.squaredNorm();
  if (ssr <= 1e-20 * tss) return std::numeric_limits<double>::infinity();
  return tss / ssr;  // 1 / (1 - R^2_j)
}

inline double two_sided_p(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

}  // namespace detail

inline RegressionResult fit_design(const Design& d, const ModelSpec& spec) {
  const auto n = static_cast<std::size_t>(d.X.rows());
  const auto k = static_cast<std::size_t>(d.X.cols());
  if (n <= k)
    throw SpecError("not enough observations: n = " + std::to_string(n) + " must exceed k = " + std::to_string(k));
  const detail::ScaledQr qr(d.X);
  if (qr.qr.rank() < d.X.cols()) {
    std::string cols;
    for (const auto& c : detail::collinear_columns(d.X, d.names)) cols += (cols.empty() ? "" : ", ") + c;
    throw SpecError("rank-deficient design; collinear columns: " + cols);
  }
  const Eigen::VectorXd beta = qr.solve(d.y);
  const Eigen::VectorXd fitted = d.X * beta;
  const Eigen::VectorXd resid = d.y - fitted;
  const double dof = static_cast<double>(n - k);

  // (X'X)^-1 from the triangular factor: X D P = Q R  =>  (X'X)^-1 = D P (R'R)^-1 P' D.
  const auto K = static_cast<Eigen::Index>(k);
  const Eigen::MatrixXd R = qr.qr.matrixR().topLeftCorner(K, K).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(K, K));
  const Eigen::MatrixXd perm = qr.qr.colsPermutation();
  const Eigen::MatrixXd bread_scaled = perm * (Rinv * Rinv.transpose()) * perm.transpose();
  const Eigen::MatrixXd bread = qr.scale.asDiagonal() * bread_scaled * qr.scale.asDiagonal();

  Eigen::MatrixXd V;
  if (spec.robust) {
    const Eigen::MatrixXd Xe = d.X.array().colwise() * resid.array();
    const Eigen::MatrixXd meat = Xe.transpose() * Xe;
    V = (static_cast<double>(n) / dof) * bread * meat * bread;
  } else {
    V = (resid.squaredNorm() / dof) * bread;
  }

  RegressionResult r;
  r.spec = spec;
  r.n = n;
  r.k = k;
  r.dof = n - k;
  r.n_dropped_missing = d.n_dropped_missing;
  r.se_type = spec.robust ? "HC1" : "classical";
  r.reference_levels = d.reference_levels;
  for (std::size_t j = 0; j < k; ++j) {
    const auto J = static_cast<Eigen::Index>(j);
    Coefficient c;
    c.name = d.names[j];
    c.estimate = beta(J);
    c.std_error = std::sqrt(std::max(0.0, V(J, J)));
    if (c.std_error > 0.0) {
      c.t = c.estimate / c.std_error;
      c.p_value = detail::two_sided_p(c.t, dof);
    } else {
      c.t = c.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
    }
    r.coefficients.push_back(c);
    r.design_means.push_back(d.X.col(J).mean());
    r.binary.push_back((d.X.col(J).array() == 0.0 || d.X.col(J).array() == 1.0).all());
  }
  r.r_squared = detail::centered_r2(d.y, resid);
  r.adj_r_squared = 1.0 - (1.0 - r.r_squared) * static_cast<double>(n - 1) / dof;
  r.fitted.assign(fitted.data(), fitted.data() + fitted.size());
  r.residuals.assign(resid.data(), resid.data() + resid.size());
  for (std::size_t p = 0; p < spec.predictors.size(); ++p)
    r.vifs[spec.predictors[p]] = detail::vif_of_column(d.X, static_cast<Eigen::Index>(1 + p));
  return r;
}

inline RegressionResult fit_ols(const Table& data, const ModelSpec& spec) {
  return fit_design(build_design(data, spec), spec);
}

// One model per level of `group` (e.g. per research field). Groups whose
// fit fails carry the error message instead of a result.
struct GroupFit {
  std::string level;
  std::optional<RegressionResult> result;
  std::string error;
};

inline std::vector<GroupFit> fit_by_group(const Table& data, const ModelSpec& spec, const std::string& group,
                                          unsigned threads = 1) {
  const auto& g = data.column(group);
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < g.size(); ++r)
    if (!Table::is_missing(g[r])) members[g[r]].push_back(r);
  ModelSpec sub = spec;
  std::erase(sub.fixed_effects, group);
  std::vector<GroupFit> out;
  for (const auto& [level, rows] : members) out.push_back({level, std::nullopt, {}});
  std::vector<const std::vector<std::size_t>*> row_sets;
  for (const auto& [level, rows] : members) row_sets.push_back(&rows);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    try {
      out[i].result = fit_ols(data.select_rows(*row_sets[i]), sub);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  }, 1);
  return out;
}

// ---------------------------------------------------------------- vif

// VIF for each listed predictor, regressing it on the other predictors, the
// fixed-effect dummies and an intercept. +inf marks exact collinearity.
inline std::map<std::string, double> vif(const Table& data, const std::vector<std::string>& predictors,
                                         const std::vector<std::string>& fixed_effects = {}) {
  if (predictors.empty()) return {};
  ModelSpec spec;
  spec.outcome = predictors.front();
  spec.predictors.assign(predictors.begin() + 1, predictors.end());
  spec.fixed_effects = fixed_effects;
  // Design with every predictor as a column: reuse build_design on a spec
  // whose outcome is the first predictor, then splice it back in.
  const Design d = build_design(data, spec);
  Eigen::MatrixXd X(d.X.rows(), d.X.cols() + 1);
  X.col(0) = d.X.col(0);
  X.col(1) = d.y;
  X.rightCols(d.X.cols() - 1) = d.X.rightCols(d.X.cols() - 1);
  std::map<std::string, double> out;
  for (std::size_t p = 0; p < predictors.size(); ++p)
    out[predictors[p]] = detail::vif_of_column(X, static_cast<Eigen::Index>(1 + p));
  return out;
}

// ---------------------------------------------------------------- margins

struct Margins {
  std::string focal;
  double pred_0 = 0.0;
  double pred_1 = 0.0;
  std::optional<double> pct_diff;  // empty when pred_0 is 0
};

// Predictions at focal = 0 and 1 with every other design column (dummies
// included) at its sample mean.
inline Margins margins(const RegressionResult& result, std::string_view focal) {
  const std::size_t f = result.position(focal);
  if (focal == kInterceptName) throw SpecError("the intercept cannot be a focal predictor");
  if (!result.binary[f]) throw SpecError("focal predictor '" + std::string(focal) + "' is not binary (0/1)");
  Margins m;
  m.focal = std::string(focal);
  double scale = std::fabs(result.coefficients[f].estimate);
  for (std::size_t j = 0; j < result.coefficients.size(); ++j) {
    if (j == f) continue;
    const double term = result.coefficients[j].estimate * result.design_means[j];
    m.pred_0 += term;
    scale += std::fabs(term);
  }
  m.pred_1 = m.pred_0 + result.coefficients[f].estimate;
  // A baseline indistinguishable from zero leaves the percentage undefined.
  if (std::fabs(m.pred_0) > 1e-12 * scale) m.pct_diff = (m.pred_1 - m.pred_0) / m.pred_0 * 100.0;
  return m;
}

// ---------------------------------------------------------------- export

enum class Legend { T4, T6 };

inline std::optional<Legend> parse_legend(std::string_view s) {
  const std::string v = detail::ascii_lower(s);
  if (v == "t4") return Legend::T4;
  if (v == "t6") return Legend::T6;
  return std::nullopt;
}

// T4: *** p<0.001, ** p<0.01, * p<0.05.  T6: *** p<0.01, ** p<0.05, * p<0.1.
inline std::string stars(double p, Legend legend) {
  const double t1 = legend == Legend::T4 ? 0.001 : 0.01;
  const double t2 = legend == Legend::T4 ? 0.01 : 0.05;
  const double t3 = legend == Legend::T4 ? 0.05 : 0.1;
  if (p < t1) return "***";
  if (p < t2) return "**";
  if (p < t3) return "*";
  return "";
}

inline std::string legend_text(Legend legend) {
  return legend == Legend::T4 ? "***p<0.001; **p<0.01; *p<0.05" : "***p<0.01; **p<0.05; *p<0.1";
}

inline std::string coefficients_csv(const RegressionResult& r, Legend legend) {
  std::string out = csv::join({"term", "estimate", "std_error", "t", "p_value", "stars", "vif"});
  for (const auto& c : r.coefficients) {
    auto it = r.vifs.find(c.name);
    out += csv::join({c.name, format_double(c.estimate), format_double(c.std_error), format_double(c.t),
                      format_double(c.p_value), stars(c.p_value, legend),
                      it == r.vifs.end() ? "" : format_double(it->second)});
  }
  return out;
}

inline nlohmann::ordered_json to_json(const RegressionResult& r, Legend legend,
                                      const std::optional<Margins>& m = std::nullopt) {
  using nlohmann::ordered_json;
  auto num = [](double v) -> ordered_json {
    if (std::isfinite(v)) return v;
    return format_double(v);  // "inf"/"nan" as strings; JSON has no literals for them
  };
  ordered_json j;
  j["formula"] = to_formula(r.spec);
  j["se_type"] = r.se_type;
  j["n"] = r.n;
  j["k"] = r.k;
  j["dof"] = r.dof;
  j["n_dropped_missing"] = r.n_dropped_missing;
  j["r_squared"] = num(r.r_squared);
  j["adj_r_squared"] = num(r.adj_r_squared);
  j["legend"] = legend_text(legend);
  j["reference_levels"] = r.reference_levels;
  j["coefficients"] = ordered_json::array();
  for (const auto& c : r.coefficients) {
    ordered_json e;
    e["term"] = c.name;
    e["estimate"] = num(c.estimate);
    e["std_error"] = num(c.std_error);
    e["t"] = num(c.t);
    e["p_value"] = num(c.p_value);
    e["stars"] = stars(c.p_value, legend);
    j["coefficients"].push_back(std::move(e));
  }
  ordered_json v = ordered_json::object();
  for (const auto& [name, value] : r.vifs) v[name] = num(value);
  j["vifs"] = std::move(v);
  if (m) {
    ordered_json mj;
    mj["focal"] = m->focal;
    mj["pred_0"] = num(m->pred_0);
    mj["pred_1"] = num(m->pred_1);
    mj["pct_diff"] = m->pct_diff ? num(*m->pct_diff) : ordered_json(nullptr);
    j["margins"] = std::move(mj);
  }
  return j;
}

}  // namespace stylo
