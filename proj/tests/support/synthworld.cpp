#include "synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "riomix/features.hpp"
#include "riomix/rng.hpp"

namespace riomix::testing {

namespace {

constexpr int kMinor = 20;
constexpr int kLarge = 8;
constexpr int kPrefectures = 42;
constexpr int kCities = 4;

std::string pref_id(int k) {
  const std::string d = std::to_string(k + 1);
  return "P" + std::string(d.size() < 2 ? 2 - d.size() : 0, '0') + d;
}

struct WorldShape {
  Vector base_sfirm;         // per minor class
  Vector emp_per_firm;       // per minor class
  Vector base_firm;          // per large class
  Vector base_vapf;          // value added per firm, per large class
  Vector sales_mult;         // sales / value added, per large class
  Vector base_y;             // per-capita output scale, per sector
  Matrix base_coeff;         // cell base levels (0 where structurally zero)
  std::vector<Matrix> cell_dirs;  // 6 modulation weight planes
  Matrix y_dirs;             // kSectors x 6 output modulation weights
  std::vector<std::pair<int, int>> zero_cells;
};

WorldShape make_shape(Rng& rng) {
  WorldShape w;
  w.base_sfirm = Vector::NullaryExpr(kMinor, [&](Eigen::Index) { return rng.uniform(40.0, 400.0); });
  w.emp_per_firm = Vector::NullaryExpr(kMinor, [&](Eigen::Index) { return rng.uniform(4.0, 35.0); });
  w.base_firm = Vector::NullaryExpr(kLarge, [&](Eigen::Index) { return rng.uniform(120.0, 900.0); });
  w.base_vapf = Vector::NullaryExpr(kLarge, [&](Eigen::Index) { return rng.uniform(20.0, 120.0); });
  w.sales_mult = Vector::NullaryExpr(kLarge, [&](Eigen::Index) { return rng.uniform(2.0, 3.5); });
  w.base_y = Vector::NullaryExpr(kSectors, [&](Eigen::Index) { return rng.uniform(0.5, 1.8); });

  // 13 structurally zero coefficients, mirroring a pool where 131 of the
  // 144 cells carry signal.
  std::set<std::pair<int, int>> zeros;
  while (zeros.size() < 13) {
    const int i = static_cast<int>(rng.uniform_int(0, kSectors - 1));
    const int j = static_cast<int>(rng.uniform_int(0, kSectors - 1));
    if (i == j) continue;  // keep diagonals alive for RAS structure
    zeros.insert({i, j});
  }
  w.zero_cells.assign(zeros.begin(), zeros.end());

  w.base_coeff = Matrix::Zero(kSectors, kSectors);
  for (int i = 0; i < kSectors; ++i)
    for (int j = 0; j < kSectors; ++j)
      w.base_coeff(i, j) = rng.uniform(0.012, 0.2);
  for (auto [i, j] : w.zero_cells) w.base_coeff(i, j) = 0.0;

  w.cell_dirs.resize(6);
  for (auto& plane : w.cell_dirs)
    plane = Matrix::NullaryExpr(kSectors, kSectors,
                                [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  w.y_dirs = Matrix::NullaryExpr(kSectors, 6,
                                 [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  return w;
}

struct RegionLatents {
  double scale = 1.0;
  Vector theta;  // 3 structural latents in [0,1]
};

RegionRecord make_raw_region(const std::string& id, const std::string& parent,
                             const WorldShape& w, const RegionLatents& lat,
                             Rng& rng) {
  const double s = lat.scale;
  const double t1 = lat.theta(0), t2 = lat.theta(1), t3 = lat.theta(2);

  RegionRecord r;
  r.region_id = id;
  r.parent_id = parent;
  r.pop15 = s * 1e6;
  r.poplf = (0.45 + 0.15 * t1) * r.pop15;
  r.unemp = (0.02 + 0.06 * t2) * r.poplf;
  r.tp = (0.40 + 0.10 * t3) * r.pop15;
  r.income = (2.0 + 1.5 * t1 + 0.5 * t2) * r.tp;

  r.sfirm.resize(kMinor);
  r.semp.resize(kMinor);
  for (int c = 0; c < kMinor; ++c) {
    // Class mix tilts smoothly with the latents; each class has its own
    // fixed phase so regions differ in composition, not just size.
    const double phase = 2.0 * 3.14159265358979 * c / kMinor;
    const double mix = 0.75 + 0.5 * (0.5 + 0.5 * std::sin(phase + 2.0 * t1 + t3));
    r.sfirm(c) = s * w.base_sfirm(c) * mix;
    r.semp(c) = r.sfirm(c) * w.emp_per_firm(c) * (0.8 + 0.4 * t2);
  }
  r.firm.resize(kLarge);
  r.va.resize(kLarge);
  r.sales.resize(kLarge);
  for (int g = 0; g < kLarge; ++g) {
    const double phase = 2.0 * 3.14159265358979 * g / kLarge;
    const double mix = 0.75 + 0.5 * (0.5 + 0.5 * std::cos(phase + t1 + 2.0 * t2));
    r.firm(g) = s * w.base_firm(g) * mix;
    const double vapf = w.base_vapf(g) * (0.7 + 0.5 * t3 + 0.2 * t1);
    r.va(g) = r.firm(g) * vapf;
    r.sales(g) = r.va(g) * w.sales_mult(g) * (0.9 + 0.2 * t2);
  }
  (void)rng;
  r.io = IOTable::zeros(id);
  return r;
}

// Scale-free summaries of the explanatory variables; the coefficient
// functions read the region only through these.
Vector intensive_summaries(const RegionRecord& r) {
  Vector z(6);
  z(0) = (r.unemp / r.poplf - 0.05) / 0.03;             // unemployment rate
  z(1) = (r.poplf / r.pop15 - 0.525) / 0.075;           // labor force ratio
  z(2) = (r.income / r.tp - 3.0) / 1.0;                 // income per taxpayer
  const double vapf = r.va.sum() / r.firm.sum();
  z(3) = (vapf - 70.0) / 35.0;                          // mean value added per firm
  const double salespf = r.sales.sum() / r.firm.sum();
  z(4) = (salespf - 190.0) / 100.0;                     // mean sales per firm
  const double front_share =
      r.sfirm.head(kMinor / 2).sum() / r.sfirm.sum();
  z(5) = (front_share - 0.5) / 0.1;                     // composition tilt
  return z;
}

}  // namespace

SynthWorld make_synth_world(std::uint64_t seed, double noise_sigma) {
  Rng rng(seed);
  const WorldShape shape = make_shape(rng);

  SynthWorld world;
  world.zero_cells = shape.zero_cells;

  std::vector<RegionLatents> latents;
  // Prefectures.
  for (int k = 0; k < kPrefectures; ++k) {
    RegionLatents lat;
    lat.scale = std::exp(rng.uniform(std::log(0.6), std::log(2.5)));
    lat.theta = Vector::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(0.0, 1.0); });
    latents.push_back(lat);
    world.pool.push_back(make_raw_region(pref_id(k), "", shape, lat, rng));
  }
  // Cities nested in the first four prefectures.
  for (int k = 0; k < kCities; ++k) {
    RegionLatents lat;
    lat.scale = latents[k].scale * rng.uniform(0.08, 0.25);
    lat.theta = Vector::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(0.0, 1.0); });
    latents.push_back(lat);
    world.pool.push_back(
        make_raw_region("C" + std::to_string(k + 1), pref_id(k), shape, lat, rng));
  }

  // Coefficients: smooth functions of the intensive summaries plus
  // region-fixed noise; flows follow as a * Y.
  for (auto& r : world.pool) {
    const Vector z = intensive_summaries(r);
    Vector y_j(kSectors);
    for (int j = 0; j < kSectors; ++j) {
      const double mod = std::tanh(shape.y_dirs.row(j).dot(z) / 3.0);
      y_j(j) = r.pop15 * 1e-3 * shape.base_y(j) * (1.0 + 0.3 * mod);
    }
    r.io.gross_output = y_j;
    for (int i = 0; i < kSectors; ++i) {
      for (int j = 0; j < kSectors; ++j) {
        if (shape.base_coeff(i, j) == 0.0) continue;
        double signal = 0.0;
        for (int p = 0; p < 6; ++p)
          signal += shape.cell_dirs[p](i, j) * z(p);
        double a = shape.base_coeff(i, j) * (1.0 + 0.55 * std::tanh(signal / 2.5));
        a += noise_sigma * rng.normal();
        r.io.intermediate(i, j) = std::max(a, 0.001) * y_j(j);
      }
    }
    r.validate();
  }

  // The nation is the composition of the prefectures (cities are already
  // part of their parents and stay out of the sum).
  std::vector<RegionRecord> prefs(world.pool.begin(),
                                  world.pool.begin() + kPrefectures);
  world.nation = linear_interpolate(prefs, std::vector<double>(kPrefectures, 1.0));
  world.nation.region_id = "nation";
  world.nation.io.region_id = "nation";
  world.nation_truth = coefficient_matrix(world.nation.io);
  return world;
}

}  // namespace riomix::testing
