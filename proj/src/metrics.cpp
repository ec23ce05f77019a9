#include "riomix/metrics.hpp"

#include <cmath>
#include <string>

#include "riomix/errors.hpp"

namespace riomix {

EvaluationReport evaluate(const Matrix& estimated, const Matrix& actual,
                          const std::optional<CellMask>& mask) {
  if (estimated.rows() != actual.rows() || estimated.cols() != actual.cols())
    throw DimensionError("evaluate: matrix shapes differ");
  if (mask && (mask->rows() != actual.rows() || mask->cols() != actual.cols()))
    throw DimensionError("evaluate: mask shape differs from the matrices");

  double abs_sum = 0.0, sq_sum = 0.0, actual_sum = 0.0, actual_sq_sum = 0.0;
  double ape_sum = 0.0;
  int n = 0, ape_n = 0, excluded = 0;
  for (Eigen::Index i = 0; i < actual.rows(); ++i) {
    for (Eigen::Index j = 0; j < actual.cols(); ++j) {
      if (mask && !(*mask)(i, j)) continue;
      const double a = actual(i, j);
      const double e = estimated(i, j);
      const double diff = e - a;
      abs_sum += std::abs(diff);
      sq_sum += diff * diff;
      actual_sum += a;
      actual_sq_sum += a * a;
      ++n;
      if (a != 0.0) {
        ape_sum += std::abs(diff / a);
        ++ape_n;
      } else {
        ++excluded;
      }
    }
  }
  if (n == 0) throw DomainError("evaluate: mask excludes every cell");
  if (actual_sum == 0.0)
    throw DomainError("evaluate: actual matrix is all zero; STPE and U2 are undefined");

  EvaluationReport r;
  r.n_a = n;
  r.mape_excluded = excluded;
  r.stpe = abs_sum / actual_sum;
  r.mad = abs_sum / n;
  r.u2 = std::sqrt(sq_sum) / std::sqrt(actual_sq_sum);
  r.rmse = std::sqrt(sq_sum / n);
  r.mape = (ape_n > 0) ? ape_sum / ape_n : 0.0;
  return r;
}

}  // namespace riomix
