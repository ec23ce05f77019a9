#pragma once

#include <optional>

#include "riomix/iodata.hpp"

namespace riomix {

using CellMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// The five error measures between an estimated and a published
/// coefficient matrix. `n_a` counts the evaluated cells; MAPE skips
/// zero-actual cells and reports how many were skipped.
struct EvaluationReport {
  double stpe = 0.0;
  double mad = 0.0;
  double u2 = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  int n_a = 0;
  int mape_excluded = 0;
};

/// STPE = sum|e-a| / sum a          MAD  = sum|e-a| / N_a
/// U2   = sqrt(sum (e-a)^2) / sqrt(sum a^2)
/// RMSE = sqrt(sum (e-a)^2 / N_a)
/// MAPE = mean of |(e-a)/a| over cells with a != 0
/// An optional mask restricts the evaluation to a cell subset (for
/// example the trained coefficients only).
EvaluationReport evaluate(const Matrix& estimated, const Matrix& actual,
                          const std::optional<CellMask>& mask = std::nullopt);

}  // namespace riomix
