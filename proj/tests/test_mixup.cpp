#include <doctest.h>

#include <array>
#include <cmath>

#include "fixtures.hpp"
#include "riomix/errors.hpp"
#include "riomix/mixup.hpp"

using namespace riomix;
using riomix::testing::make_fixture_pool;
using riomix::testing::make_fixture_region;

TEST_CASE("standardize_by_pop15: identity, definition, elementwise oracle") {
  auto r = make_fixture_region("r", "", 3);
  r.pop15 = 1.0;
  const auto same = standardize_by_pop15(r);
  CHECK(same.income == r.income);
  CHECK(same.pop15 == 1.0);

  auto r2 = make_fixture_region("r2", "", 4);
  r2.pop15 = 2.0;
  r2.income = 10.0;
  const auto half = standardize_by_pop15(r2);
  CHECK(half.pop15 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(half.income == doctest::Approx(5.0));

  const auto pref = make_fixture_region("pref", "", 5);
  const auto std_pref = standardize_by_pop15(pref);
  const double inv = 1.0 / pref.pop15;
  for (Eigen::Index c = 0; c < pref.sfirm.size(); ++c)
    CHECK(std_pref.sfirm(c) == pref.sfirm(c) * inv);
  for (int i = 0; i < kSectors; ++i)
    for (int j = 0; j < kSectors; ++j)
      CHECK(std_pref.io.intermediate(i, j) == pref.io.intermediate(i, j) * inv);

  auto dead = make_fixture_region("dead", "", 6);
  dead.pop15 = 0.0;
  CHECK_THROWS_AS(standardize_by_pop15(dead), DomainError);
}

TEST_CASE("sample_weights: simplex constraint and k = 1") {
  Rng rng(11);
  CHECK(sample_weights(1, 1.0, rng)(0) == 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 5;
    const double alpha = 0.3 + 0.4 * (trial % 7);
    const Vector w = sample_weights(k, alpha, rng);
    CHECK(w.size() == k);
    CHECK((w.array() >= 0.0).all());
    CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(sample_weights(0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(sample_weights(3, 0.0, rng), DomainError);
}

TEST_CASE("sample_weights: alpha = 1 Dirichlet moments") {
  Rng rng(13);
  const int draws = 100000;
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (int d = 0; d < draws; ++d) {
    const Vector w = sample_weights(3, 1.0, rng);
    for (int i = 0; i < 3; ++i) mean[i] += w(i);
  }
  for (int i = 0; i < 3; ++i) {
    mean[i] /= draws;
    CHECK(std::abs(mean[i] - 1.0 / 3.0) <= 0.01);
  }
}

namespace {

MixupConfig small_config() {
  MixupConfig c;
  c.alpha = 1.0;
  c.k_min = 2;
  c.k_max = 2;
  c.count = 10;
  c.target_mode = FixedPop15{1.0};
  c.seed = 99;
  return c;
}

std::vector<RegionRecord> standardized_pool(std::vector<RegionRecord> pool) {
  for (auto& r : pool) r = standardize_by_pop15(r);
  return pool;
}

}  // namespace

TEST_CASE("sample_virtual_region: two-member average and provenance") {
  const auto raw = make_fixture_pool(2, 21);
  const auto pool = standardized_pool(raw);
  const AncestryIndex ancestry(pool);
  Rng rng(5);
  const auto vr = sample_virtual_region(pool, ancestry, small_config(), rng);

  REQUIRE(vr.provenance.size() == 2);
  double weight_sum = 0.0;
  for (const auto& [id, lambda] : vr.provenance) weight_sum += lambda;
  CHECK(std::abs(weight_sum - 1.0) <= 1e-12);

  // Reconstruct by hand from the recorded provenance.
  Vector expected_y = Vector::Zero(kSectors);
  double expected_income = 0.0;
  for (const auto& [id, lambda] : vr.provenance) {
    for (const auto& r : pool)
      if (r.region_id == id) {
        expected_y += lambda * vr.rescale_factor * r.io.gross_output;
        expected_income += lambda * vr.rescale_factor * r.income;
      }
  }
  CHECK((vr.record.io.gross_output - expected_y).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(vr.record.income == doctest::Approx(expected_income).epsilon(1e-12));
}

TEST_CASE("sample_virtual_region: fixed target pop15 is hit exactly") {
  const auto pool = standardized_pool(make_fixture_pool(6, 22));
  const AncestryIndex ancestry(pool);
  MixupConfig config = small_config();
  config.k_min = 2;
  config.k_max = 5;
  config.target_mode = FixedPop15{12345.5};
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const auto vr = sample_virtual_region(pool, ancestry, config, rng);
    CHECK(std::abs(vr.record.pop15 - 12345.5) <= 1e-9 * 12345.5);
  }
}

TEST_CASE("sample_virtual_region: uniform target mode stays in range") {
  const auto pool = standardized_pool(make_fixture_pool(6, 23));
  const AncestryIndex ancestry(pool);
  MixupConfig config = small_config();
  config.target_mode = UniformPop15{100.0, 500.0};
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto vr = sample_virtual_region(pool, ancestry, config, rng);
    CHECK(vr.record.pop15 >= 100.0 - 1e-9);
    CHECK(vr.record.pop15 <= 500.0 + 1e-9);
  }
}

TEST_CASE("sample_virtual_region rejects parent-child selections") {
  auto parent = make_fixture_region("hokkaido", "", 31);
  auto child = make_fixture_region("sapporo", "hokkaido", 32);
  auto other = make_fixture_region("other", "", 33);
  const std::vector<RegionRecord> raw{parent, child, other};
  const AncestryIndex ancestry(raw);
  const auto pool = standardized_pool(raw);

  MixupConfig config = small_config();
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto vr = sample_virtual_region(pool, ancestry, config, rng);
    bool has_parent = false, has_child = false;
    for (const auto& [id, lambda] : vr.provenance) {
      has_parent |= (id == "hokkaido");
      has_child |= (id == "sapporo");
    }
    CHECK_FALSE((has_parent && has_child));
  }

  // Only the conflicting pair available: sampling must give up.
  const std::vector<RegionRecord> conflicted_raw{parent, child};
  const AncestryIndex conflicted_ancestry(conflicted_raw);
  const auto conflicted = standardized_pool(conflicted_raw);
  Rng rng2(9);
  CHECK_THROWS_AS(sample_virtual_region(conflicted, conflicted_ancestry,
                                        small_config(), rng2),
                  SamplingError);
}

TEST_CASE("generate_dataset: count zero, determinism, provenance safety") {
  const auto pool = standardized_pool(make_fixture_pool(7, 41));
  const AncestryIndex ancestry(pool);
  MixupConfig config;
  config.count = 0;
  config.seed = 17;
  CHECK(generate_dataset(pool, ancestry, config).empty());

  config.count = 64;
  const auto a = generate_dataset(pool, ancestry, config);
  const auto b = generate_dataset(pool, ancestry, config);
  REQUIRE(a.size() == 64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].record.region_id == b[i].record.region_id);
    CHECK(a[i].rescale_factor == b[i].rescale_factor);
    CHECK((a[i].record.io.gross_output - b[i].record.io.gross_output)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((a[i].record.sfirm - b[i].record.sfirm).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a[i].provenance.size() == b[i].provenance.size());
    for (std::size_t k = 0; k < a[i].provenance.size(); ++k) {
      CHECK(a[i].provenance[k].first == b[i].provenance[k].first);
      CHECK(a[i].provenance[k].second == b[i].provenance[k].second);
    }
  }

  config.seed = 18;
  const auto c = generate_dataset(pool, ancestry, config);
  bool any_difference = false;
  for (std::size_t i = 0; i < c.size(); ++i)
    any_difference |= (c[i].record.pop15 != a[i].record.pop15) ||
                      (c[i].provenance != a[i].provenance);
  CHECK(any_difference);
}

TEST_CASE("generate_dataset: K histogram is uniform over 2..5") {
  const auto pool = standardized_pool(make_fixture_pool(5, 51));
  const AncestryIndex ancestry(pool);
  MixupConfig config;
  config.count = 10000;
  config.seed = 5150;
  const auto data = generate_dataset(pool, ancestry, config);
  std::array<int, 6> histogram{};
  for (const auto& vr : data) histogram[vr.provenance.size()]++;
  for (int k = 2; k <= 5; ++k) {
    const double share = histogram[k] / 10000.0;
    CHECK(std::abs(share - 0.25) <= 0.02);
  }
}

TEST_CASE("generated regions keep the coefficient envelope and scale freedom") {
  const auto raw = make_fixture_pool(6, 61);
  const auto pool = standardized_pool(raw);
  const AncestryIndex ancestry(pool);
  MixupConfig config;
  config.count = 60;
  config.seed = 62;
  config.target_mode = UniformPop15{10.0, 1000.0};
  const auto data = generate_dataset(pool, ancestry, config);

  for (const auto& vr : data) {
    Matrix lo = Matrix::Constant(kSectors, kSectors, 1e300);
    Matrix hi = Matrix::Constant(kSectors, kSectors, -1e300);
    for (const auto& [id, lambda] : vr.provenance) {
      for (const auto& r : pool)
        if (r.region_id == id) {
          const Matrix c = coefficient_matrix(r.io);
          lo = lo.cwiseMin(c);
          hi = hi.cwiseMax(c);
        }
    }
    const Matrix c = coefficient_matrix(vr.record.io);
    CHECK(((c.array() >= lo.array() - 1e-12) && (c.array() <= hi.array() + 1e-12)).all());

    // Rescaling is invisible to the coefficients.
    const Matrix unscaled =
        coefficient_matrix(scale_region(vr.record, 1.0 / vr.rescale_factor).io);
    CHECK((c - unscaled).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("mixup config validation") {
  MixupConfig c;
  c.alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = MixupConfig{};
  c.k_min = 1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = MixupConfig{};
  c.k_min = 4;
  c.k_max = 3;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = MixupConfig{};
  c.target_mode = UniformPop15{5.0, 4.0};
  CHECK_THROWS_AS(c.validate(), DomainError);

  const auto pool = standardized_pool(make_fixture_pool(3, 71));
  const AncestryIndex ancestry(pool);
  MixupConfig small;
  small.k_max = 5;  // pool too small
  Rng rng(1);
  CHECK_THROWS_AS(sample_virtual_region(pool, ancestry, small, rng), SamplingError);
}
