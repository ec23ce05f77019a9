#pragma once

#include <cstdint>
#include <random>

namespace riomix {

/// Seedable random source with hand-rolled distributions.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the
/// standard, and every distribution below is built from raw 64-bit draws
/// with fixed arithmetic (uniforms from the top 53 bits, normals via
/// Box-Muller, gammas via Marsaglia-Tsang). Results are therefore
/// bit-identical across platforms and standard libraries, which the
/// dataset-generation determinism contract depends on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1]; safe under log().
  double uniform_pos();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer on [lo, hi], inclusive, rejection-sampled (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal via Box-Muller; consumes two draws per call.
  double normal();
  /// Gamma(shape=alpha, scale=1), alpha > 0.
  double gamma(double alpha);

  /// Deterministic sub-stream seed for worker/cell/index fan-out.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace riomix
