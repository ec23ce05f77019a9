#pragma once

#include <vector>

#include "riomix/iodata.hpp"

namespace riomix {

/// Per-class denominators for the composition-ratio features: the sum of
/// sfirm / semp over every region in the pool (or national totals, when
/// supplied externally).
struct PoolTotals {
  Vector sfirm;
  Vector semp;
};

PoolTotals compute_pool_totals(const std::vector<RegionRecord>& pool);

/// Explanatory-variable vector of a region, laid out as:
///   [0, m)        sfirm counts                 (m = minor classes)
///   [m, 2m)       sfirm composition ratios     sfirm_c / totals.sfirm_c
///   [2m, 3m)      semp counts
///   [3m, 4m)      semp composition ratios
///   [4m, 4m+L)    value added                  (L = large classes)
///   [.., +L)      value added per firm         va_c / firm_c
///   [.., +L)      sales
///   [.., +L)      sales per firm
///   then scalars: income, income per taxpayer, labor force population,
///   labor force ratio (poplf/pop15), unemployment rate (unemp/poplf).
///
/// 0/0 ratios evaluate to 0 (an absent class contributes nothing);
/// a positive numerator over a zero denominator is a domain error.
Vector compute_features(const RegionRecord& region, const PoolTotals& totals);

int feature_dimension(int minor_classes, int large_classes);

/// Centered/standardized principal component basis. `components` is
/// k x d with orthonormal rows; `explained_ratio` is each component's
/// share of the total standardized variance, non-increasing.
struct PCAModel {
  Vector mean;
  Vector scale;
  Matrix components;
  Vector explained_ratio;

  int n_components() const { return static_cast<int>(components.rows()); }
  int dimension() const { return static_cast<int>(components.cols()); }
};

/// Fits on the rows of X (observations x features). Features are
/// standardized before the decomposition; zero-variance features get
/// their scale clamped to 1. Needs more rows than components.
PCAModel fit_pca(const Matrix& X, int n_components = 50);

/// Score vector components * ((f - mean) / scale).
Vector project(const PCAModel& model, const Vector& features);

/// Row-wise projection of a feature matrix.
Matrix project_rows(const PCAModel& model, const Matrix& X);

/// Affine squash of one coefficient's training range into [0, ~2/3]:
///   a_hat = (a - a_L) / (a_U - a_L)
/// with a_L = max(0, a_min) and a_U = min(1, a_max + 0.5 (a_max - a_min)).
struct TargetTransform {
  double a_min = 0.0;
  double a_max = 0.0;
  double a_lower = 0.0;  // a_L
  double a_upper = 0.0;  // a_U

  static TargetTransform fit(const Vector& coefficients);
  static TargetTransform from_extrema(double a_min, double a_max);

  /// True when a_L = a_U: the coefficient is constant on the training
  /// data and the network must be bypassed.
  bool degenerate() const { return !(a_upper > a_lower); }
};

double transform_target(double a, const TargetTransform& t);
double inverse_transform(double a_hat, const TargetTransform& t);

}  // namespace riomix
