#include "riomix/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "riomix/errors.hpp"

namespace riomix {

PoolTotals compute_pool_totals(const std::vector<RegionRecord>& pool) {
  if (pool.empty()) throw DomainError("compute_pool_totals: empty pool");
  PoolTotals t;
  t.sfirm = Vector::Zero(pool.front().sfirm.size());
  t.semp = Vector::Zero(pool.front().semp.size());
  for (const auto& r : pool) {
    if (r.sfirm.size() != t.sfirm.size() || r.semp.size() != t.semp.size())
      throw DimensionError("compute_pool_totals: class dimensions differ at region '" +
                           r.region_id + "'");
    t.sfirm += r.sfirm;
    t.semp += r.semp;
  }
  return t;
}

int feature_dimension(int minor_classes, int large_classes) {
  return 4 * minor_classes + 4 * large_classes + 5;
}

namespace {

// 0/0 -> 0 (absent class); x/0 with x > 0 is corrupt data.
double safe_ratio(double num, double den, const char* what,
                  const std::string& region) {
  if (den == 0.0) {
    if (num == 0.0) return 0.0;
    throw DomainError(std::string(what) + " has positive numerator over zero denominator in region '" +
                      region + "'");
  }
  return num / den;
}

}  // namespace

Vector compute_features(const RegionRecord& region, const PoolTotals& totals) {
  region.validate();
  const auto m = region.sfirm.size();
  const auto L = region.va.size();
  if (totals.sfirm.size() != m || totals.semp.size() != m)
    throw DimensionError("compute_features: pool totals do not match region '" +
                         region.region_id + "'");
  if (region.semp.size() != m || region.sales.size() != L || region.firm.size() != L)
    throw DimensionError("compute_features: inconsistent class vectors in region '" +
                         region.region_id + "'");

  Vector f(feature_dimension(static_cast<int>(m), static_cast<int>(L)));
  Eigen::Index pos = 0;
  f.segment(pos, m) = region.sfirm;
  pos += m;
  for (Eigen::Index c = 0; c < m; ++c)
    f(pos + c) = safe_ratio(region.sfirm(c), totals.sfirm(c),
                            "sfirm composition ratio", region.region_id);
  pos += m;
  f.segment(pos, m) = region.semp;
  pos += m;
  for (Eigen::Index c = 0; c < m; ++c)
    f(pos + c) = safe_ratio(region.semp(c), totals.semp(c),
                            "semp composition ratio", region.region_id);
  pos += m;
  f.segment(pos, L) = region.va;
  pos += L;
  for (Eigen::Index c = 0; c < L; ++c)
    f(pos + c) = safe_ratio(region.va(c), region.firm(c), "value added per firm",
                            region.region_id);
  pos += L;
  f.segment(pos, L) = region.sales;
  pos += L;
  for (Eigen::Index c = 0; c < L; ++c)
    f(pos + c) = safe_ratio(region.sales(c), region.firm(c), "sales per firm",
                            region.region_id);
  pos += L;
  f(pos++) = region.income;
  f(pos++) = safe_ratio(region.income, region.tp, "income per taxpayer",
                        region.region_id);
  f(pos++) = region.poplf;
  f(pos++) = safe_ratio(region.poplf, region.pop15, "labor force ratio",
                        region.region_id);
  f(pos++) = safe_ratio(region.unemp, region.poplf, "unemployment rate",
                        region.region_id);
  return f;
}

PCAModel fit_pca(const Matrix& X, int n_components) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n_components < 1) throw DomainError("fit_pca: need at least one component");
  if (n_components > d)
    throw DimensionError("fit_pca: " + std::to_string(n_components) +
                         " components exceed feature dimension " + std::to_string(d));
  if (n < n_components + 1)
    throw DimensionError("fit_pca: need more rows than components, got " +
                         std::to_string(n));
  if (!X.allFinite()) throw DomainError("fit_pca: non-finite entries in feature matrix");

  PCAModel model;
  model.mean = X.colwise().mean();
  Matrix centered = X.rowwise() - model.mean.transpose();
  Vector var = centered.array().square().colwise().sum() / double(n - 1);
  if (var.sum() <= 0.0) throw DomainError("fit_pca: zero total variance");
  model.scale = var.array().sqrt();
  for (Eigen::Index c = 0; c < d; ++c)
    if (model.scale(c) == 0.0) model.scale(c) = 1.0;  // constant feature
  centered.array().rowwise() /= model.scale.transpose().array();

  // Covariance route: d x d is far smaller than n x d at training scale.
  Matrix cov = (centered.transpose() * centered) / double(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success)
    throw ConvergenceError("fit_pca: eigendecomposition failed");

  // Eigen returns ascending eigenvalues; take the top ones reversed.
  const double total_var = cov.trace();
  model.components.resize(n_components, d);
  model.explained_ratio.resize(n_components);
  for (int k = 0; k < n_components; ++k) {
    const auto src = d - 1 - k;
    Vector comp = eig.eigenvectors().col(src);
    // Canonical sign: largest-magnitude loading is positive.
    Eigen::Index argmax = 0;
    comp.cwiseAbs().maxCoeff(&argmax);
    if (comp(argmax) < 0.0) comp = -comp;
    model.components.row(k) = comp.transpose();
    model.explained_ratio(k) = std::max(0.0, eig.eigenvalues()(src)) / total_var;
  }
  return model;
}

Vector project(const PCAModel& model, const Vector& features) {
  if (features.size() != model.dimension())
    throw DimensionError("project: feature vector of size " +
                         std::to_string(features.size()) + " does not match model dimension " +
                         std::to_string(model.dimension()));
  return model.components *
         ((features - model.mean).array() / model.scale.array()).matrix();
}

Matrix project_rows(const PCAModel& model, const Matrix& X) {
  if (X.cols() != model.dimension())
    throw DimensionError("project_rows: column count does not match model dimension");
  Matrix centered = X.rowwise() - model.mean.transpose();
  centered.array().rowwise() /= model.scale.transpose().array();
  return centered * model.components.transpose();
}

TargetTransform TargetTransform::from_extrema(double a_min, double a_max) {
  if (!(a_min <= a_max))
    throw DomainError("target transform: a_min > a_max");
  TargetTransform t;
  t.a_min = a_min;
  t.a_max = a_max;
  t.a_lower = std::max(0.0, a_min);
  t.a_upper = std::min(1.0, a_max + 0.5 * (a_max - a_min));
  return t;
}

TargetTransform TargetTransform::fit(const Vector& coefficients) {
  if (coefficients.size() == 0)
    throw DomainError("target transform: no training coefficients");
  return from_extrema(coefficients.minCoeff(), coefficients.maxCoeff());
}

double transform_target(double a, const TargetTransform& t) {
  if (t.degenerate())
    throw DomainError("target transform is degenerate (a_L = a_U); bypass training");
  return (a - t.a_lower) / (t.a_upper - t.a_lower);
}

double inverse_transform(double a_hat, const TargetTransform& t) {
  return a_hat * (t.a_upper - t.a_lower) + t.a_lower;
}

}  // namespace riomix
