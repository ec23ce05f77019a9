#include "fixtures.hpp"

namespace riomix::testing {

RegionRecord make_fixture_region(const std::string& id, const std::string& parent,
                                 std::uint64_t seed, int minor, int large) {
  Rng rng(seed);
  RegionRecord r;
  r.region_id = id;
  r.parent_id = parent;
  r.sfirm = Vector::NullaryExpr(minor, [&](Eigen::Index) { return rng.uniform(20.0, 400.0); });
  r.semp = Vector::NullaryExpr(minor, [&](Eigen::Index) { return rng.uniform(100.0, 6000.0); });
  r.va = Vector::NullaryExpr(large, [&](Eigen::Index) { return rng.uniform(500.0, 9000.0); });
  r.sales = Vector::NullaryExpr(large, [&](Eigen::Index) { return rng.uniform(1000.0, 30000.0); });
  r.firm = Vector::NullaryExpr(large, [&](Eigen::Index) { return rng.uniform(10.0, 250.0); });
  r.income = rng.uniform(1e4, 9e4);
  r.tp = rng.uniform(4e3, 4e4);
  r.poplf = rng.uniform(1e4, 8e4);
  r.unemp = rng.uniform(100.0, 3000.0);
  r.pop15 = rng.uniform(2e4, 2e5);
  r.io = IOTable::zeros(id);
  for (int j = 0; j < kSectors; ++j) {
    const double y = rng.uniform(50.0, 900.0);
    r.io.gross_output(j) = y;
    for (int i = 0; i < kSectors; ++i)
      r.io.intermediate(i, j) = rng.uniform(0.0, 0.07) * y;
  }
  return r;
}

std::vector<RegionRecord> make_fixture_pool(int count, std::uint64_t seed,
                                            int minor, int large) {
  std::vector<RegionRecord> pool;
  pool.reserve(count);
  for (int i = 0; i < count; ++i)
    pool.push_back(make_fixture_region("r" + std::to_string(i), "",
                                       Rng::derive_seed(seed, i), minor, large));
  return pool;
}

std::vector<DetailedRegionalFlows> make_consistent_flows(
    const std::vector<std::string>& ids, Rng& rng) {
  std::vector<DetailedRegionalFlows> flows;
  for (const auto& id : ids) {
    auto f = DetailedRegionalFlows::zeros(id);
    auto rand_matrix = [&rng]() {
      return Matrix::NullaryExpr(kSectors, kSectors,
                                 [&rng](Eigen::Index) { return rng.uniform(0.0, 5.0); });
    };
    auto rand_vector = [&rng](double hi) {
      return Vector::NullaryExpr(kSectors,
                                 [&rng, hi](Eigen::Index) { return rng.uniform(0.0, hi); });
    };
    f.intra = rand_matrix();
    f.imported = rand_matrix();
    f.final_local = rand_vector(40.0);
    f.imported_final = rand_vector(10.0);
    f.exports = rand_vector(10.0);
    for (const auto& src : ids) {
      if (src == id) continue;
      f.received[src] = rand_matrix();
      f.received_final[src] = rand_vector(8.0);
    }
    f.received["outside"] = rand_matrix();
    f.received_final["outside"] = rand_vector(8.0);
    f.shipped["elsewhere"] = rand_vector(12.0);
    flows.push_back(std::move(f));
  }

  // Shipping ledgers mirror the receivers' itemized receipts exactly.
  for (auto& shipper : flows) {
    for (const auto& receiver : flows) {
      if (receiver.region_id == shipper.region_id) continue;
      Vector total = receiver.received.at(shipper.region_id).rowwise().sum() +
                     receiver.received_final.at(shipper.region_id);
      shipper.shipped[receiver.region_id] = total;
    }
  }

  // Gross output closes the accounting identity.
  for (auto& f : flows) {
    f.gross_output = f.intra.rowwise().sum() + f.final_local +
                     f.shipping_total() + f.exports;
    f.validate();
  }
  return flows;
}

}  // namespace riomix::testing
