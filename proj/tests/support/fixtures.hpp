#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riomix/iodata.hpp"
#include "riomix/rng.hpp"

namespace riomix::testing {

/// Deterministic region with positive values in every field.
/// minor/large control the class-vector dimensions.
RegionRecord make_fixture_region(const std::string& id, const std::string& parent,
                                 std::uint64_t seed, int minor = 6, int large = 3);

/// A pool of `count` unrelated fixture regions r0, r1, ...
std::vector<RegionRecord> make_fixture_pool(int count, std::uint64_t seed,
                                            int minor = 6, int large = 3);

/// Mutually consistent detailed-flow ledgers for `ids`, trading pairwise
/// and with an outside region; gross outputs satisfy the accounting
/// identity exactly.
std::vector<DetailedRegionalFlows> make_consistent_flows(
    const std::vector<std::string>& ids, Rng& rng);

}  // namespace riomix::testing
