#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riomix/config.hpp"
#include "riomix/csvio.hpp"
#include "riomix/metrics.hpp"

namespace riomix {

/// Reads and validates a Region CSV. Rows violating record invariants
/// are rejected with row-numbered diagnostics.
std::vector<RegionRecord> ingest(const std::string& path);

/// One coefficient cell's persisted model: a trained network with its
/// target transform, a constant fallback (degenerate transform), or a
/// skip flag (the coefficient is zero across the whole pool).
struct ModelBundle {
  int row = 0;  // 0-based from-industry
  int col = 0;  // 0-based to-industry
  enum class Status { kTrained, kConstant, kSkipped } status = Status::kSkipped;
  TargetTransform transform;
  double constant = 0.0;
  std::optional<MLPParams> params;

  std::string label() const;  // a_01_01 style, 1-based
};

/// Shared artifacts plus the 144 per-cell bundles, in row-major cell order.
struct BundleSet {
  std::string config_hash;
  int minor_classes = 0;
  int large_classes = 0;
  PoolTotals totals;
  PCAModel pca;
  std::vector<ModelBundle> cells;
};

struct CellReport {
  int row = 0, col = 0;
  ModelBundle::Status status = ModelBundle::Status::kSkipped;
  double a_min = 0.0, a_max = 0.0;
  double val_mse = 0.0;   // transformed space; trained cells only
  double test_mse = 0.0;  // transformed space; trained cells only
  int epochs = 0;
  int best_epoch = -1;
};

struct RunSummary {
  std::string config_hash;
  int trained = 0;
  int constant = 0;
  int skipped = 0;
  std::vector<CellReport> cells;  // 144, row-major
};

/// The full training flow: mixup generation, feature computation, PCA on
/// the training split, one model per coefficient cell (parallel across
/// `config.workers` threads), everything persisted under
/// config.output_dir. Deterministic in (config, seed): reruns produce
/// byte-identical artifacts regardless of worker count.
RunSummary run_training(const PipelineConfig& config,
                        const std::vector<RegionRecord>& pool);
RunSummary run_training(const PipelineConfig& config);  // pool from config.pool_csv

BundleSet load_bundles(const std::string& model_dir);
void save_bundles(const std::string& model_dir, const BundleSet& bundles,
                  const RunSummary& summary,
                  const std::vector<std::vector<EpochStats>>& histories);

/// Assembles the predicted 12x12 coefficient matrix for a target region.
/// Only the target's macro variables are read; its IO block never is.
Matrix run_inference(const BundleSet& bundles, const RegionRecord& target);
Matrix run_inference(const std::string& model_dir, const RegionRecord& target);

struct FiveMetrics {
  double stpe = 0.0, mad = 0.0, u2 = 0.0, rmse = 0.0, mape = 0.0;
};

struct MetricRange {
  FiveMetrics min, mean, max;
};

struct BaselineRun {
  std::string reference_id;
  Matrix flq_estimate;
  EvaluationReport flq_report;
  Matrix ras_estimate;
  EvaluationReport ras_report;
  int ras_iterations = 0;
  double ras_residual = 0.0;
};

struct BaselineSummary {
  std::vector<BaselineRun> runs;
  MetricRange flq;
  MetricRange ras;
};

/// FLQ and RAS estimates of the target's coefficients from each
/// reference, evaluated against the target's published matrix, with
/// min/mean/max over references. Margins for RAS come from the target
/// table itself. Direction kToNational treats the target as the larger
/// economy (references are its regions); kToRegional scales each
/// reference's coefficients down to the target.
BaselineSummary run_baselines(const std::vector<RegionRecord>& references,
                              const IOTable& target, const BaselineConfig& config,
                              const std::optional<CellMask>& mask = std::nullopt);

}  // namespace riomix
