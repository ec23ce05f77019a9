#pragma once

#include <cstdint>
#include <vector>

#include "riomix/features.hpp"
#include "riomix/iodata.hpp"
#include "riomix/rng.hpp"

namespace riomix {

/// Architecture: `blocks` repetitions of (dense -> batch norm -> ELU),
/// then a scalar sigmoid output. L2 regularization applies to dense
/// weights only, never to biases or batch-norm parameters.
struct MLPConfig {
  int input_dim = 50;
  int blocks = 10;
  int block_width = 512;
  double l2_lambda = 0.01;

  void validate() const;
};

struct BlockParams {
  Matrix weight;    // width x fan_in
  Vector bias;      // width
  Vector bn_gain;   // gamma
  Vector bn_shift;  // beta
  Vector bn_mean;   // running mean (inference statistics)
  Vector bn_var;    // running variance
};

struct MLPParams {
  std::vector<BlockParams> blocks;
  Vector out_weight;
  double out_bias = 0.0;
};

/// Gradient container: dense + batch-norm trainables, same shapes as the
/// corresponding MLPParams fields.
struct BlockGrads {
  Matrix weight;
  Vector bias;
  Vector bn_gain;
  Vector bn_shift;
};

struct Gradients {
  std::vector<BlockGrads> blocks;
  Vector out_weight;
  double out_bias = 0.0;
};

/// He initialization: weights ~ Normal(0, sqrt(2/fan_in)) drawn row-major,
/// biases and shifts 0, gains 1, running mean 0 / variance 1.
MLPParams init_params(const MLPConfig& config, Rng& rng);

enum class Mode { kTrain, kInfer };

/// Per-block activations retained by a training-mode forward pass.
struct BlockCache {
  Matrix input;      // batch x fan_in
  Matrix normalized; // x-hat, batch x width
  Matrix activated;  // post-ELU, batch x width
  Vector batch_mean;
  Vector batch_var;  // biased (1/B)
  Vector inv_std;    // 1/sqrt(var + eps)
};

struct ForwardCache {
  std::vector<BlockCache> blocks;
  Vector predictions;
};

inline constexpr double kBatchNormEps = 1e-8;

/// Predictions in (0,1) for a batch (rows = samples). Train mode
/// normalizes with batch statistics and requires at least 2 rows; infer
/// mode uses the stored running statistics and is deterministic row-wise.
/// Running statistics are never touched here; apply them explicitly with
/// update_running_stats.
Vector forward(const MLPParams& params, const Matrix& batch, Mode mode,
               ForwardCache* cache = nullptr);

/// Folds the cached batch statistics into the running mean/variance:
/// running <- momentum * running + (1 - momentum) * batch.
void update_running_stats(MLPParams& params, const ForwardCache& cache,
                          double momentum = 0.99);

/// Mean squared error over the batch plus l2_lambda * sum of squared
/// dense weights, evaluated with a train-mode forward.
double training_loss(const MLPParams& params, const MLPConfig& config,
                     const Matrix& batch, const Vector& targets);

struct LossGrads {
  double loss = 0.0;
  Gradients grads;
  ForwardCache cache;
};

/// Reverse-mode gradients of training_loss for every trainable tensor.
LossGrads loss_and_gradients(const MLPParams& params, const MLPConfig& config,
                             const Matrix& batch, const Vector& targets);

struct TrainConfig {
  double lr_min = 0.0001;  // also the initial rate
  double lr_max = 0.01;
  int lr_step_size = 50;    // iterations per half-cycle
  double lr_gamma = 0.9999; // exp_range amplitude decay per iteration
  double momentum = 0.9;    // Nesterov
  int batch_size = 32;
  int max_epochs = 200;
  int patience = 10;  // consecutive validation increases before stopping
  std::uint64_t seed = 0;

  void validate() const;
};

/// Triangular cycle between lr_min and lr_max with exponentially decaying
/// amplitude (Smith's exp_range policy). Iteration 0 sits at lr_min.
double cyclical_lr(long iteration, const TrainConfig& t);

/// Streak counter for validation-loss early stopping. Stop after
/// `patience` consecutive strict increases; the caller keeps the snapshot
/// of the best epoch seen.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  struct Decision {
    bool new_best = false;
    bool stop = false;
  };
  Decision observe(double val_loss);

  double best() const { return best_; }
  int best_index() const { return best_index_; }

 private:
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  double previous_ = std::numeric_limits<double>::infinity();
  int streak_ = 0;
  int index_ = -1;
  int best_index_ = -1;
};

struct EpochStats {
  double train_loss = 0.0;  // mean over batches, L2 term included
  double val_mse = 0.0;     // inference-mode MSE, no L2 term
  double lr_last = 0.0;     // learning rate of the epoch's final iteration
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;       // 0-based
  double best_val_mse = 0.0;
  bool stopped_early = false;
};

struct TrainResult {
  MLPParams params;  // snapshot with the lowest validation MSE
  TrainHistory history;
};

/// Mini-batch Nesterov-accelerated gradient descent with per-epoch
/// seeded shuffling, cyclical learning rate, and early stopping on the
/// validation MSE. Targets are in transformed (a-hat) space.
TrainResult train(const Matrix& x_train, const Vector& y_train,
                  const Matrix& x_val, const Vector& y_val,
                  const MLPConfig& mconfig, const TrainConfig& tconfig);

/// Inference for one score vector mapped back to coefficient space;
/// always lands strictly inside (a_L, a_U).
double predict(const MLPParams& params, const Vector& scores,
               const TargetTransform& transform);

}  // namespace riomix
