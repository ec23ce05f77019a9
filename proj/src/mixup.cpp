#include "riomix/mixup.hpp"

#include <cmath>
#include <string>

#include "riomix/errors.hpp"

namespace riomix {

void MixupConfig::validate() const {
  if (!(alpha > 0.0)) throw DomainError("mixup: alpha must be positive");
  if (k_min < 2 || k_min > k_max)
    throw DomainError("mixup: need 2 <= k_min <= k_max, got [" +
                      std::to_string(k_min) + ", " + std::to_string(k_max) + "]");
  if (count < 0) throw DomainError("mixup: count must be nonnegative");
  if (const auto* u = std::get_if<UniformPop15>(&target_mode)) {
    if (!(u->lower <= u->upper) || !(u->lower > 0.0))
      throw DomainError("mixup: uniform pop15 range needs 0 < lower <= upper");
  } else if (const auto* f = std::get_if<FixedPop15>(&target_mode)) {
    if (!(f->value > 0.0)) throw DomainError("mixup: fixed pop15 must be positive");
  }
  if (max_rejections < 1) throw DomainError("mixup: max_rejections must be >= 1");
}

RegionRecord standardize_by_pop15(const RegionRecord& region) {
  if (!(region.pop15 > 0.0))
    throw DomainError("standardize_by_pop15: region '" + region.region_id +
                      "' has pop15 <= 0");
  return scale_region(region, 1.0 / region.pop15);
}

Vector sample_weights(int k, double alpha, Rng& rng) {
  if (k < 1) throw DomainError("sample_weights: k must be >= 1");
  if (!(alpha > 0.0)) throw DomainError("sample_weights: alpha must be positive");
  if (k == 1) return Vector::Ones(1);
  Vector g(k);
  double total = 0.0;
  do {
    for (int i = 0; i < k; ++i) g(i) = rng.gamma(alpha);
    total = g.sum();
  } while (!(total > 0.0));  // astronomically unlikely underflow guard
  return g / total;
}

namespace {

// K distinct indices, uniform without replacement (partial Fisher-Yates).
std::vector<int> draw_distinct(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = static_cast<int>(rng.uniform_int(i, n - 1));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

bool has_inclusion_pair(const std::vector<RegionRecord>& pool,
                        const std::vector<int>& selection,
                        const AncestryIndex& ancestry) {
  for (std::size_t a = 0; a < selection.size(); ++a)
    for (std::size_t b = a + 1; b < selection.size(); ++b)
      if (ancestry.related(pool[selection[a]].region_id,
                           pool[selection[b]].region_id))
        return true;
  return false;
}

}  // namespace

VirtualRegion sample_virtual_region(const std::vector<RegionRecord>& pool,
                                    const AncestryIndex& ancestry,
                                    const MixupConfig& config, Rng& rng) {
  config.validate();
  const int n = static_cast<int>(pool.size());
  if (n < config.k_max)
    throw SamplingError("mixup: pool of " + std::to_string(n) +
                        " regions is smaller than k_max=" +
                        std::to_string(config.k_max));

  const int k = static_cast<int>(rng.uniform_int(config.k_min, config.k_max));

  std::vector<int> selection;
  bool found = false;
  for (int attempt = 0; attempt < config.max_rejections; ++attempt) {
    selection = draw_distinct(n, k, rng);
    if (!has_inclusion_pair(pool, selection, ancestry)) {
      found = true;
      break;
    }
  }
  if (!found)
    throw SamplingError("mixup: no inclusion-free selection of " +
                        std::to_string(k) + " regions found after " +
                        std::to_string(config.max_rejections) + " attempts");

  const Vector weights = sample_weights(k, config.alpha, rng);

  std::vector<RegionRecord> members;
  std::vector<double> lambdas;
  members.reserve(k);
  lambdas.reserve(k);
  for (int i = 0; i < k; ++i) {
    members.push_back(pool[selection[i]]);
    lambdas.push_back(weights(i));
  }

  VirtualRegion out;
  out.record = linear_interpolate(members, lambdas);
  // Standardized members have pop15 = 1 and the weights sum to 1, so the
  // interpolated record sits at pop15 = 1; one scalar lands it on target.
  double target = 0.0;
  if (const auto* f = std::get_if<FixedPop15>(&config.target_mode)) {
    target = f->value;
  } else {
    const auto& u = std::get<UniformPop15>(config.target_mode);
    target = rng.uniform(u.lower, u.upper);
  }
  out.rescale_factor = target / out.record.pop15;
  out.record = scale_region(out.record, out.rescale_factor);
  for (int i = 0; i < k; ++i)
    out.provenance.emplace_back(members[i].region_id, lambdas[i]);
  return out;
}

std::vector<VirtualRegion> generate_dataset(const std::vector<RegionRecord>& pool,
                                            const AncestryIndex& ancestry,
                                            const MixupConfig& config) {
  config.validate();
  std::vector<VirtualRegion> out;
  out.reserve(config.count);
  for (int i = 0; i < config.count; ++i) {
    Rng rng(Rng::derive_seed(config.seed, static_cast<std::uint64_t>(i)));
    out.push_back(sample_virtual_region(pool, ancestry, config, rng));
    std::string id = "v";
    const std::string digits = std::to_string(i);
    id += std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
    out.back().record.region_id = id;
    out.back().record.io.region_id = id;
  }
  return out;
}

}  // namespace riomix
