#include <doctest.h>

#include <cmath>

#include "riomix/baselines.hpp"
#include "riomix/errors.hpp"
#include "riomix/rng.hpp"

using namespace riomix;

namespace {

FLQInputs grown_inputs(Rng& rng, double regional_share) {
  Vector national = Vector::NullaryExpr(kSectors, [&](Eigen::Index) {
    return rng.uniform(100.0, 1000.0);
  });
  Vector regional(kSectors);
  for (int i = 0; i < kSectors; ++i)
    regional(i) = national(i) * rng.uniform(0.2, 1.0) * regional_share;
  return FLQInputs::from_outputs(std::move(regional), std::move(national));
}

}  // namespace

TEST_CASE("flq: identity region gives lambda 1 and quotients 1") {
  Vector outputs(kSectors);
  for (int i = 0; i < kSectors; ++i) outputs(i) = 10.0 + i;
  const auto inputs = FLQInputs::from_outputs(outputs, outputs);
  CHECK(inputs.lambda() == doctest::Approx(1.0).epsilon(1e-15));
  const Matrix flq = flq_matrix(inputs);
  CHECK((flq.array() - 1.0).abs().maxCoeff() <= 1e-12);

  // FLQ >= 1 passes the national coefficients through untouched.
  Rng rng(3);
  const Matrix national = Matrix::NullaryExpr(
      kSectors, kSectors, [&](Eigen::Index) { return rng.uniform(0.0, 0.3); });
  CHECK((flq_regionalize(national, inputs) - national).cwiseAbs().maxCoeff() == 0.0);
  CHECK((flq_nationalize(national, inputs) - national).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("flq: direct formula evaluation") {
  // Shares: region/nation totals equal, industry i at 0.5, industry j at 0.25.
  Vector national = Vector::Constant(kSectors, 100.0);
  Vector regional = Vector::Constant(kSectors, 100.0);
  regional(0) = 50.0;
  regional(1) = 25.0;
  FLQInputs inputs;
  inputs.regional_output = regional;
  inputs.national_output = national;
  inputs.regional_total = 1200.0;  // keeps lambda at [log2 2]^2 = 1
  inputs.national_total = 1200.0;
  CHECK(flq_coefficient(0, 1, inputs) == doctest::Approx(2.0).epsilon(1e-12));
  // Diagonal uses the total share 1.0.
  CHECK(flq_coefficient(0, 0, inputs) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("flq: lambda against the frozen calculator value") {
  Vector national = Vector::Constant(kSectors, 100.0);
  Vector regional = Vector::Constant(kSectors, 30.0);
  auto inputs = FLQInputs::from_outputs(regional, national);
  // [log2(1.3)]^2 computed independently at 30 digits.
  CHECK(inputs.lambda() == doctest::Approx(0.1432710489381735).epsilon(1e-14));
  inputs.mode = FLQExponentMode::kFleggDelta;
  inputs.delta = 0.1;
  CHECK(inputs.lambda() == doctest::Approx(0.9074191118305823).epsilon(1e-14));
}

TEST_CASE("flq_regionalize: case split and cellwise oracle") {
  Rng rng(7);
  const auto inputs = grown_inputs(rng, 0.5);
  const Matrix flq = flq_matrix(inputs);
  const Matrix national = Matrix::NullaryExpr(
      kSectors, kSectors, [&](Eigen::Index) { return rng.uniform(0.01, 0.3); });
  const Matrix regional = flq_regionalize(national, inputs);
  bool saw_scaled = false, saw_passthrough = false;
  for (int i = 0; i < kSectors; ++i) {
    for (int j = 0; j < kSectors; ++j) {
      const double expected =
          flq(i, j) < 1.0 ? national(i, j) * flq(i, j) : national(i, j);
      CHECK(regional(i, j) == doctest::Approx(expected).epsilon(1e-15));
      CHECK(regional(i, j) <= national(i, j) + 1e-15);  // never increases
      (flq(i, j) < 1.0 ? saw_scaled : saw_passthrough) = true;
    }
  }
  CHECK(saw_scaled);  // the fixture hits the scaling branch
}

TEST_CASE("flq round-trip: nationalize undoes regionalize exactly") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inputs = grown_inputs(rng, rng.uniform(0.1, 0.95));
    const Matrix national = Matrix::NullaryExpr(
        kSectors, kSectors, [&](Eigen::Index) { return rng.uniform(0.0, 0.4); });
    const Matrix regional = flq_regionalize(national, inputs);
    const Matrix back = flq_nationalize(regional, inputs);
    CHECK((back - national).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("flq: zero shares raise quotient errors") {
  Vector national = Vector::Constant(kSectors, 100.0);
  Vector regional = Vector::Constant(kSectors, 50.0);
  regional(2) = 0.0;  // industry 3 absent in the region
  const auto inputs = FLQInputs::from_outputs(regional, national);
  CHECK_THROWS_AS(flq_coefficient(0, 2, inputs), UndefinedQuotientError);
  // Zero in the numerator is fine: the quotient is 0.
  CHECK(flq_coefficient(2, 0, inputs) == 0.0);

  Matrix coeffs = Matrix::Constant(kSectors, kSectors, 0.1);
  CHECK_THROWS_AS(flq_nationalize(coeffs, inputs), UndefinedQuotientError);

  Vector bad_national = national;
  bad_national(5) = 0.0;
  FLQInputs bad;
  bad.regional_output = regional;
  bad.national_output = bad_national;
  bad.regional_total = regional.sum();
  bad.national_total = bad_national.sum();
  CHECK_THROWS_AS(flq_coefficient(5, 0, bad), UndefinedQuotientError);
}

TEST_CASE("ras: an already-balanced matrix is a one-iteration fixed point") {
  RASProblem problem;
  problem.initial.resize(2, 2);
  problem.initial << 1.0, 2.0, 3.0, 4.0;
  problem.row_targets = Vector(2);
  problem.row_targets << 3.0, 7.0;
  problem.col_targets = Vector(2);
  problem.col_targets << 4.0, 6.0;
  problem.gross_outputs = Vector::Ones(2);
  const auto result = ras_fit(problem);
  CHECK(result.iterations == 1);
  CHECK((result.flows - problem.initial).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("ras: hand-iterated 2x2 biproportional fixed point") {
  RASProblem problem;
  problem.initial = Matrix::Constant(2, 2, 1.0);
  problem.row_targets = Vector(2);
  problem.row_targets << 3.0, 1.0;
  problem.col_targets = Vector(2);
  problem.col_targets << 2.0, 2.0;
  problem.gross_outputs = Vector::Ones(2);
  problem.tolerance = 1e-12;
  const auto result = ras_fit(problem);
  Matrix expected(2, 2);
  expected << 1.5, 1.5, 0.5, 0.5;
  CHECK((result.flows - expected).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((result.coefficients - expected).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(result.residual < 1e-12);
}

TEST_CASE("ras: inconsistent margins are rejected") {
  RASProblem problem;
  problem.initial = Matrix::Constant(2, 2, 1.0);
  problem.row_targets = Vector(2);
  problem.row_targets << 3.0, 1.0;
  problem.col_targets = Vector(2);
  problem.col_targets << 2.0, 2.5;
  problem.gross_outputs = Vector::Ones(2);
  CHECK_THROWS_AS(ras_fit(problem), DomainError);
}

TEST_CASE("ras: structural zeros blocking the targets fail loudly") {
  RASProblem problem;
  problem.initial = Matrix::Zero(2, 2);
  problem.initial(0, 1) = 1.0;
  problem.initial(1, 0) = 1.0;
  problem.row_targets = Vector(2);
  problem.row_targets << 2.0, 1.0;
  problem.col_targets = Vector(2);
  problem.col_targets << 2.0, 1.0;
  problem.gross_outputs = Vector::Ones(2);
  problem.max_iterations = 200;
  CHECK_THROWS_AS(ras_fit(problem), ConvergenceError);

  // A zero row facing a positive target is detected before iterating.
  RASProblem dead;
  dead.initial = Matrix::Zero(2, 2);
  dead.initial(1, 0) = 1.0;
  dead.initial(1, 1) = 1.0;
  dead.row_targets = Vector(2);
  dead.row_targets << 1.0, 1.0;
  dead.col_targets = Vector(2);
  dead.col_targets << 1.0, 1.0;
  dead.gross_outputs = Vector::Ones(2);
  CHECK_THROWS_AS(ras_fit(dead), ConvergenceError);
}

TEST_CASE("ras: random consistent problems converge with zeros preserved") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    // A feasible target is any biproportional rescaling of the initial
    // matrix with the same zero pattern.
    Matrix initial = Matrix::NullaryExpr(
        kSectors, kSectors, [&](Eigen::Index) { return rng.uniform(0.5, 4.0); });
    for (int z = 0; z < 30; ++z)
      initial(rng.uniform_int(0, kSectors - 1), rng.uniform_int(0, kSectors - 1)) = 0.0;
    for (int d = 0; d < kSectors; ++d) initial(d, d) = rng.uniform(0.5, 4.0);

    Matrix balanced = initial;
    for (int i = 0; i < kSectors; ++i) balanced.row(i) *= rng.uniform(0.5, 2.0);
    for (int j = 0; j < kSectors; ++j) balanced.col(j) *= rng.uniform(0.5, 2.0);

    RASProblem problem;
    problem.initial = initial;
    problem.row_targets = balanced.rowwise().sum();
    problem.col_targets = balanced.colwise().sum();
    problem.gross_outputs = Vector::NullaryExpr(
        kSectors, [&](Eigen::Index) { return rng.uniform(10.0, 50.0); });
    problem.margin_consistency_rtol = 1e-12;
    const auto result = ras_fit(problem);

    CHECK((result.flows.rowwise().sum() - problem.row_targets).cwiseAbs().maxCoeff() <
          1e-9);
    CHECK((result.flows.colwise().sum().transpose() - problem.col_targets)
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    for (int i = 0; i < kSectors; ++i)
      for (int j = 0; j < kSectors; ++j) {
        if (initial(i, j) == 0.0) CHECK(result.flows(i, j) == 0.0);
        CHECK(result.coefficients(i, j) ==
              doctest::Approx(result.flows(i, j) / problem.gross_outputs(j))
                  .epsilon(1e-12));
      }
  }
}
