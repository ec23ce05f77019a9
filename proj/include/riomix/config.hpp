#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riomix/baselines.hpp"
#include "riomix/mixup.hpp"
#include "riomix/neuralnet.hpp"

namespace riomix {

enum class BaselineDirection { kToNational, kToRegional };

struct BaselineConfig {
  double flq_delta = 0.1;
  FLQExponentMode flq_mode = FLQExponentMode::kPrintedSquare;
  double ras_tolerance = 1e-9;
  int ras_max_iterations = 10000;
  BaselineDirection direction = BaselineDirection::kToNational;
};

/// Everything a full run needs. Defaults reproduce the reference
/// training recipe: 50000 virtual regions split 40000/10000 with a 0.2
/// validation fraction, 50 principal components, a 10-block width-512
/// network, and the published optimizer settings.
struct PipelineConfig {
  std::string pool_csv;
  std::string target_csv;
  std::string output_dir;
  std::vector<std::string> exclude_regions;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = one per hardware thread

  MixupConfig mixup;
  int train_count = 40000;
  int test_count = 10000;
  double validation_fraction = 0.2;
  int pca_components = 50;
  MLPConfig network;
  TrainConfig training;
  BaselineConfig baselines;

  // Composition-ratio denominators default to pool totals; national
  // totals can be supplied instead.
  std::optional<std::vector<double>> sfirm_totals;
  std::optional<std::vector<double>> semp_totals;

  void validate() const;

  static PipelineConfig load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_json_string() const;
  static PipelineConfig from_json_string(const std::string& text);

  /// FNV-1a over the scientific parameters (not paths or worker count);
  /// stamps every bundle manifest so mismatched artifacts are caught.
  std::string config_hash() const;
};

}  // namespace riomix
