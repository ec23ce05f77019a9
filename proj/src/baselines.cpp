#include "riomix/baselines.hpp"

#include <cmath>
#include <string>

#include "riomix/errors.hpp"

namespace riomix {

FLQInputs FLQInputs::from_outputs(Vector regional, Vector national, double delta,
                                  FLQExponentMode mode) {
  FLQInputs in;
  in.regional_total = regional.sum();
  in.national_total = national.sum();
  in.regional_output = std::move(regional);
  in.national_output = std::move(national);
  in.delta = delta;
  in.mode = mode;
  in.validate();
  return in;
}

void FLQInputs::validate() const {
  if (regional_output.size() != national_output.size())
    throw DimensionError("flq: regional and national output sizes differ");
  if ((regional_output.array() < 0.0).any() || (national_output.array() < 0.0).any())
    throw DomainError("flq: outputs must be nonnegative");
  if (!(national_total > 0.0)) throw DomainError("flq: national total must be positive");
  if (regional_total < 0.0) throw DomainError("flq: regional total must be nonnegative");
  if (regional_total > national_total * (1.0 + 1e-12))
    throw DomainError("flq: regional total exceeds national total");
  if (!(delta > 0.0)) throw DomainError("flq: delta must be positive");
}

double FLQInputs::lambda() const {
  const double base = std::log2(1.0 + regional_total / national_total);
  const double exponent = (mode == FLQExponentMode::kPrintedSquare) ? 2.0 : delta;
  return std::pow(base, exponent);
}

namespace {

double location_quotient(int idx, const FLQInputs& in) {
  const double xn = in.national_output(idx);
  if (!(xn > 0.0))
    throw UndefinedQuotientError("flq: national output of industry " +
                                 std::to_string(idx + 1) + " is zero");
  return in.regional_output(idx) / xn;
}

}  // namespace

double flq_coefficient(int i, int j, const FLQInputs& inputs) {
  inputs.validate();
  if (i < 0 || i >= inputs.regional_output.size() || j < 0 ||
      j >= inputs.regional_output.size())
    throw DomainError("flq: industry index out of range");
  const double num = location_quotient(i, inputs);
  const double den = (i == j) ? inputs.regional_total / inputs.national_total
                              : location_quotient(j, inputs);
  if (!(den > 0.0))
    throw UndefinedQuotientError(
        "flq: zero regional share in the denominator for industry " +
        std::to_string(j + 1));
  return inputs.lambda() * num / den;
}

Matrix flq_matrix(const FLQInputs& inputs) {
  const auto n = inputs.regional_output.size();
  Matrix flq(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      flq(i, j) = flq_coefficient(static_cast<int>(i), static_cast<int>(j), inputs);
  return flq;
}

Matrix flq_regionalize(const Matrix& national_coeffs, const FLQInputs& inputs) {
  const Matrix flq = flq_matrix(inputs);
  if (national_coeffs.rows() != flq.rows() || national_coeffs.cols() != flq.cols())
    throw DimensionError("flq_regionalize: coefficient matrix does not match outputs");
  return (flq.array() < 1.0)
      .select(national_coeffs.array() * flq.array(), national_coeffs.array());
}

Matrix flq_nationalize(const Matrix& regional_coeffs, const FLQInputs& inputs) {
  const Matrix flq = flq_matrix(inputs);
  if (regional_coeffs.rows() != flq.rows() || regional_coeffs.cols() != flq.cols())
    throw DimensionError("flq_nationalize: coefficient matrix does not match outputs");
  Matrix out = regional_coeffs;
  for (Eigen::Index i = 0; i < flq.rows(); ++i)
    for (Eigen::Index j = 0; j < flq.cols(); ++j)
      if (flq(i, j) < 1.0) {
        if (flq(i, j) == 0.0) {
          if (regional_coeffs(i, j) > 0.0)
            throw UndefinedQuotientError(
                "flq_nationalize: zero quotient against a positive coefficient at (" +
                std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
          // 0/0: the regionalized value was 0 regardless of the national one.
          out(i, j) = 0.0;
        } else {
          out(i, j) = regional_coeffs(i, j) / flq(i, j);
        }
      }
  return out;
}

void RASProblem::validate() const {
  const auto n = initial.rows();
  if (initial.cols() != n) throw DimensionError("ras: initial matrix must be square");
  if (row_targets.size() != n || col_targets.size() != n ||
      gross_outputs.size() != n)
    throw DimensionError("ras: target/output sizes do not match the matrix");
  if ((initial.array() < 0.0).any()) throw DomainError("ras: negative initial entries");
  if ((row_targets.array() < 0.0).any() || (col_targets.array() < 0.0).any())
    throw DomainError("ras: negative margin targets");
  if ((gross_outputs.array() < 0.0).any())
    throw DomainError("ras: negative gross outputs");
  if (!(tolerance > 0.0)) throw DomainError("ras: tolerance must be positive");
  if (max_iterations < 1) throw DomainError("ras: max_iterations must be >= 1");

  const double su = row_targets.sum();
  const double sv = col_targets.sum();
  const double scale = std::max({su, sv, 1.0});
  if (std::abs(su - sv) > margin_consistency_rtol * scale)
    throw DomainError("ras: margins are inconsistent (sum u = " +
                      std::to_string(su) + ", sum v = " + std::to_string(sv) + ")");

  for (Eigen::Index i = 0; i < n; ++i) {
    if (row_targets(i) > 0.0 && initial.row(i).sum() == 0.0)
      throw ConvergenceError("ras: row " + std::to_string(i + 1) +
                             " is structurally zero but has a positive target");
    if (col_targets(i) > 0.0 && initial.col(i).sum() == 0.0)
      throw ConvergenceError("ras: column " + std::to_string(i + 1) +
                             " is structurally zero but has a positive target");
  }
}

RASResult ras_fit(const RASProblem& problem) {
  problem.validate();
  const auto n = problem.initial.rows();
  Matrix flows = problem.initial;

  auto max_residual = [&]() {
    const Vector row_err = (flows.rowwise().sum() - problem.row_targets).cwiseAbs();
    const Vector col_err = (flows.colwise().sum().transpose() - problem.col_targets)
                               .cwiseAbs();
    return std::max(row_err.maxCoeff(), col_err.maxCoeff());
  };

  int iter = 0;
  double residual = max_residual();
  while (residual >= problem.tolerance && iter < problem.max_iterations) {
    ++iter;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = flows.row(i).sum();
      flows.row(i) *= (s > 0.0) ? problem.row_targets(i) / s : 0.0;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s = flows.col(j).sum();
      flows.col(j) *= (s > 0.0) ? problem.col_targets(j) / s : 0.0;
    }
    residual = max_residual();
  }

  if (residual >= problem.tolerance)
    throw ConvergenceError("ras: residual " + std::to_string(residual) +
                           " after " + std::to_string(iter) +
                           " iterations (tolerance " +
                           std::to_string(problem.tolerance) +
                           "); the zero structure may block the targets");

  RASResult result;
  result.flows = flows;
  result.iterations = std::max(iter, 1);  // an already-balanced input counts once
  result.residual = residual;
  result.coefficients = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double y = problem.gross_outputs(j);
    if (y > 0.0) result.coefficients.col(j) = flows.col(j) / y;
  }
  return result;
}

}  // namespace riomix
