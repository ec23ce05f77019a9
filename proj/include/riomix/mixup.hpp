#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "riomix/iodata.hpp"
#include "riomix/rng.hpp"

namespace riomix {

/// Rescale every virtual region so its pop15 hits one fixed value
/// (predicting a known target region) ...
struct FixedPop15 {
  double value = 1.0;
};

/// ... or a fresh uniform draw per virtual region (predicting cities of
/// unknown size).
struct UniformPop15 {
  double lower = 0.0;
  double upper = 1.0;
};

using TargetPopMode = std::variant<FixedPop15, UniformPop15>;

struct MixupConfig {
  double alpha = 1.0;  // Dirichlet concentration; 1 = uniform on the simplex
  int k_min = 2;
  int k_max = 5;
  int count = 50000;
  TargetPopMode target_mode = FixedPop15{1.0};
  std::uint64_t seed = 0;
  int max_rejections = 1000;  // per virtual region, for inclusion conflicts

  void validate() const;
};

/// A composed-and-rescaled synthetic region plus how it was built.
/// `provenance` holds (source id, lambda) pairs whose weights sum to 1
/// before rescaling; `rescale_factor` is the final pop15-matching scalar.
struct VirtualRegion {
  RegionRecord record;
  std::vector<std::pair<std::string, double>> provenance;
  double rescale_factor = 1.0;
};

/// scale_region by 1/pop15, so the standardized record has pop15 = 1.
RegionRecord standardize_by_pop15(const RegionRecord& region);

/// Dirichlet(alpha, ..., alpha) draw of dimension k via normalized
/// Gamma(alpha, 1) variates. Components are nonnegative and sum to 1.
Vector sample_weights(int k, double alpha, Rng& rng);

/// One virtual region: K ~ U{k_min..k_max} distinct pool members drawn
/// uniformly without replacement (selections containing an inclusion pair
/// are rejected and redrawn), Dirichlet-combined, then rescaled to the
/// target pop15. Pool records must be standardized (pop15 = 1 each).
VirtualRegion sample_virtual_region(const std::vector<RegionRecord>& pool,
                                    const AncestryIndex& ancestry,
                                    const MixupConfig& config, Rng& rng);

/// config.count virtual regions. Each index uses an RNG sub-stream derived
/// from (config.seed, index), so the dataset is reproducible bit for bit
/// and independent of how generation is partitioned across workers.
std::vector<VirtualRegion> generate_dataset(const std::vector<RegionRecord>& pool,
                                            const AncestryIndex& ancestry,
                                            const MixupConfig& config);

}  // namespace riomix
