#pragma once

#include "riomix/iodata.hpp"

namespace riomix {

/// Gross-output data feeding the FLQ location quotients. The printed
/// size multiplier is lambda = [log2(1 + x_r/x_n)]^2; the Flegg
/// convention replaces the exponent 2 with delta. Both are available,
/// the printed form is the default.
enum class FLQExponentMode { kPrintedSquare, kFleggDelta };

struct FLQInputs {
  Vector regional_output;  // x_r per industry
  Vector national_output;  // x_n per industry
  double regional_total = 0.0;
  double national_total = 0.0;
  double delta = 0.1;
  FLQExponentMode mode = FLQExponentMode::kPrintedSquare;

  /// Totals defaulted to the vector sums.
  static FLQInputs from_outputs(Vector regional, Vector national,
                                double delta = 0.1,
                                FLQExponentMode mode = FLQExponentMode::kPrintedSquare);

  double lambda() const;
  void validate() const;
};

/// FLQ_{i,j}: lambda * (x_r_i/x_n_i) / (x_r_j/x_n_j) off the diagonal,
/// lambda * (x_r_i/x_n_i) / (x_r/x_n) on it. 0-based indices.
double flq_coefficient(int i, int j, const FLQInputs& inputs);

Matrix flq_matrix(const FLQInputs& inputs);

/// a_r = a_national * FLQ where FLQ < 1, else a_national.
Matrix flq_regionalize(const Matrix& national_coeffs, const FLQInputs& inputs);

/// Exact inverse of flq_regionalize: a_national = a_r / FLQ where
/// FLQ < 1, else a_r.
Matrix flq_nationalize(const Matrix& regional_coeffs, const FLQInputs& inputs);

/// Biproportional fitting problem. `initial` holds flows (coefficients
/// premultiplied by gross outputs); row targets u are total intermediate
/// demands, column targets v total intermediate inputs.
struct RASProblem {
  Matrix initial;
  Vector row_targets;    // u
  Vector col_targets;    // v
  Vector gross_outputs;  // Y, for the coefficient conversion
  double tolerance = 1e-9;
  int max_iterations = 10000;
  double margin_consistency_rtol = 1e-6;

  void validate() const;
};

struct RASResult {
  Matrix coefficients;  // flows divided columnwise by Y
  Matrix flows;
  int iterations = 0;
  double residual = 0.0;  // max margin deviation at exit
};

/// Alternate row/column scaling until every margin matches within
/// tolerance. Zero cells of the initial matrix are preserved exactly;
/// margins blocked by the zero structure surface as a convergence error
/// carrying the residual.
RASResult ras_fit(const RASProblem& problem);

}  // namespace riomix
