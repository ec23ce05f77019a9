#include "riomix/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "riomix/errors.hpp"

namespace riomix {

void MLPConfig::validate() const {
  if (input_dim < 1) throw DomainError("network: input_dim must be >= 1");
  if (blocks < 1) throw DomainError("network: need at least one block");
  if (block_width < 1) throw DomainError("network: block width must be >= 1");
  if (l2_lambda < 0.0) throw DomainError("network: l2_lambda must be >= 0");
}

void TrainConfig::validate() const {
  if (!(lr_min > 0.0) || !(lr_min <= lr_max))
    throw DomainError("training: need 0 < lr_min <= lr_max");
  if (lr_step_size < 1) throw DomainError("training: lr_step_size must be >= 1");
  if (!(lr_gamma > 0.0) || lr_gamma > 1.0)
    throw DomainError("training: lr_gamma must be in (0, 1]");
  if (momentum < 0.0 || momentum >= 1.0)
    throw DomainError("training: momentum must be in [0, 1)");
  if (batch_size < 2) throw DomainError("training: batch_size must be >= 2");
  if (max_epochs < 1) throw DomainError("training: max_epochs must be >= 1");
  if (patience < 1) throw DomainError("training: patience must be >= 1");
}

MLPParams init_params(const MLPConfig& config, Rng& rng) {
  config.validate();
  MLPParams p;
  p.blocks.resize(config.blocks);
  int fan_in = config.input_dim;
  for (auto& block : p.blocks) {
    const int width = config.block_width;
    block.weight.resize(width, fan_in);
    const double std = std::sqrt(2.0 / fan_in);
    for (int r = 0; r < width; ++r)
      for (int c = 0; c < fan_in; ++c) block.weight(r, c) = std * rng.normal();
    block.bias = Vector::Zero(width);
    block.bn_gain = Vector::Ones(width);
    block.bn_shift = Vector::Zero(width);
    block.bn_mean = Vector::Zero(width);
    block.bn_var = Vector::Ones(width);
    fan_in = width;
  }
  p.out_weight.resize(fan_in);
  const double std = std::sqrt(2.0 / fan_in);
  for (int c = 0; c < fan_in; ++c) p.out_weight(c) = std * rng.normal();
  p.out_bias = 0.0;
  return p;
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void elu_inplace(Matrix& h) {
  h = h.array().max(0.0) + (h.array().min(0.0).exp() - 1.0);
}

}  // namespace

Vector forward(const MLPParams& params, const Matrix& batch, Mode mode,
               ForwardCache* cache) {
  if (params.blocks.empty()) throw DomainError("forward: uninitialized parameters");
  const auto n = batch.rows();
  if (n < 1) throw DomainError("forward: empty batch");
  if (mode == Mode::kTrain && n < 2)
    throw DomainError("forward: train mode needs a batch of >= 2 rows "
                      "(batch variance is undefined)");
  if (batch.cols() != params.blocks.front().weight.cols())
    throw DimensionError("forward: batch has " + std::to_string(batch.cols()) +
                         " columns, network expects " +
                         std::to_string(params.blocks.front().weight.cols()));

  if (cache) cache->blocks.resize(params.blocks.size());

  Matrix x = batch;
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    const auto& block = params.blocks[b];
    Matrix z = x * block.weight.transpose();
    z.rowwise() += block.bias.transpose();

    Vector mean, var;
    if (mode == Mode::kTrain) {
      mean = z.colwise().mean();
      z.rowwise() -= mean.transpose();
      var = z.array().square().colwise().sum() / double(n);
    } else {
      mean = block.bn_mean;
      var = block.bn_var;
      z.rowwise() -= mean.transpose();
    }
    const Vector inv_std = (var.array() + kBatchNormEps).rsqrt();
    z.array().rowwise() *= inv_std.transpose().array();  // z is now x-hat

    if (cache) {
      auto& c = (*cache).blocks[b];
      c.input = std::move(x);
      c.normalized = z;
      c.batch_mean = mean;
      c.batch_var = var;
      c.inv_std = inv_std;
    }

    z.array().rowwise() *= block.bn_gain.transpose().array();
    z.rowwise() += block.bn_shift.transpose();
    elu_inplace(z);
    if (cache) (*cache).blocks[b].activated = z;
    x = std::move(z);
  }

  Vector logits = x * params.out_weight;
  logits.array() += params.out_bias;
  Vector preds(n);
  for (Eigen::Index i = 0; i < n; ++i) preds(i) = sigmoid(logits(i));
  if (cache) cache->predictions = preds;
  return preds;
}

void update_running_stats(MLPParams& params, const ForwardCache& cache,
                          double momentum) {
  if (cache.blocks.size() != params.blocks.size())
    throw DimensionError("update_running_stats: cache does not match network");
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    auto& block = params.blocks[b];
    block.bn_mean = momentum * block.bn_mean + (1.0 - momentum) * cache.blocks[b].batch_mean;
    block.bn_var = momentum * block.bn_var + (1.0 - momentum) * cache.blocks[b].batch_var;
  }
}

namespace {

double l2_penalty(const MLPParams& params, double lambda) {
  if (lambda == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& block : params.blocks) sum += block.weight.squaredNorm();
  sum += params.out_weight.squaredNorm();
  return lambda * sum;
}

}  // namespace

double training_loss(const MLPParams& params, const MLPConfig& config,
                     const Matrix& batch, const Vector& targets) {
  if (targets.size() != batch.rows())
    throw DimensionError("training_loss: target count does not match batch");
  const Vector preds = forward(params, batch, Mode::kTrain);
  const double mse = (preds - targets).squaredNorm() / double(batch.rows());
  return mse + l2_penalty(params, config.l2_lambda);
}

LossGrads loss_and_gradients(const MLPParams& params, const MLPConfig& config,
                             const Matrix& batch, const Vector& targets) {
  if (targets.size() != batch.rows())
    throw DimensionError("loss_and_gradients: target count does not match batch");
  const auto n = batch.rows();

  LossGrads out;
  forward(params, batch, Mode::kTrain, &out.cache);
  const Vector& preds = out.cache.predictions;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(preds(i)) || !std::isfinite(targets(i)))
      throw ConvergenceError("non-finite prediction or target at batch row " +
                             std::to_string(i));
  }

  out.loss = (preds - targets).squaredNorm() / double(n) +
             l2_penalty(params, config.l2_lambda);
  if (!std::isfinite(out.loss))
    throw ConvergenceError("non-finite training loss over the current batch");

  // d MSE / d prediction, then through the sigmoid.
  Vector dlogit = (2.0 / double(n)) * (preds - targets);
  dlogit.array() *= preds.array() * (1.0 - preds.array());

  const Matrix& last_act = out.cache.blocks.back().activated;
  out.grads.out_weight = last_act.transpose() * dlogit;
  if (config.l2_lambda != 0.0)
    out.grads.out_weight += 2.0 * config.l2_lambda * params.out_weight;
  out.grads.out_bias = dlogit.sum();

  Matrix dact = dlogit * params.out_weight.transpose();  // n x width

  out.grads.blocks.resize(params.blocks.size());
  for (int b = static_cast<int>(params.blocks.size()) - 1; b >= 0; --b) {
    const auto& block = params.blocks[b];
    const auto& c = out.cache.blocks[b];
    auto& g = out.grads.blocks[b];

    // ELU'(h) is 1 on the positive side and elu(h)+1 on the other.
    Matrix dh = dact.array() *
                (c.activated.array() > 0.0)
                    .select(Matrix::Ones(n, c.activated.cols()),
                            c.activated.array() + 1.0)
                    .array();

    g.bn_gain = (dh.array() * c.normalized.array()).colwise().sum();
    g.bn_shift = dh.colwise().sum();

    Matrix dxhat = dh.array().rowwise() * block.bn_gain.transpose().array();

    // Fused batch-norm backward (biased variance):
    // dz = inv_std/n * (n*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat))
    const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
    const Eigen::RowVectorXd sum_dxhat_xhat =
        (dxhat.array() * c.normalized.array()).colwise().sum();
    Matrix dz = double(n) * dxhat;
    dz.rowwise() -= sum_dxhat;
    dz -= (c.normalized.array().rowwise() * sum_dxhat_xhat.array()).matrix();
    dz.array().rowwise() *= (c.inv_std.transpose().array() / double(n));

    g.weight.noalias() = dz.transpose() * c.input;
    if (config.l2_lambda != 0.0) g.weight += 2.0 * config.l2_lambda * block.weight;
    g.bias = dz.colwise().sum();

    if (b > 0) dact.noalias() = dz * block.weight;
  }
  return out;
}

double cyclical_lr(long iteration, const TrainConfig& t) {
  if (iteration < 0) throw DomainError("cyclical_lr: negative iteration");
  const long cycle = 1 + iteration / (2L * t.lr_step_size);
  const double x = std::abs(double(iteration) / t.lr_step_size - 2.0 * cycle + 1.0);
  const double amplitude =
      (t.lr_max - t.lr_min) * std::pow(t.lr_gamma, double(iteration));
  return t.lr_min + amplitude * std::max(0.0, 1.0 - x);
}

EarlyStopper::Decision EarlyStopper::observe(double val_loss) {
  ++index_;
  Decision d;
  if (val_loss < best_) {
    best_ = val_loss;
    best_index_ = index_;
    d.new_best = true;
  }
  streak_ = (val_loss > previous_) ? streak_ + 1 : 0;
  previous_ = val_loss;
  d.stop = streak_ >= patience_;
  return d;
}

namespace {

struct Velocity {
  std::vector<BlockGrads> blocks;
  Vector out_weight;
  double out_bias = 0.0;

  static Velocity zeros_like(const MLPParams& p) {
    Velocity v;
    v.blocks.resize(p.blocks.size());
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      v.blocks[b].weight = Matrix::Zero(p.blocks[b].weight.rows(),
                                        p.blocks[b].weight.cols());
      v.blocks[b].bias = Vector::Zero(p.blocks[b].bias.size());
      v.blocks[b].bn_gain = Vector::Zero(p.blocks[b].bn_gain.size());
      v.blocks[b].bn_shift = Vector::Zero(p.blocks[b].bn_shift.size());
    }
    v.out_weight = Vector::Zero(p.out_weight.size());
    return v;
  }
};

void add_scaled(MLPParams& p, const Velocity& v, double scale) {
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    p.blocks[b].weight += scale * v.blocks[b].weight;
    p.blocks[b].bias += scale * v.blocks[b].bias;
    p.blocks[b].bn_gain += scale * v.blocks[b].bn_gain;
    p.blocks[b].bn_shift += scale * v.blocks[b].bn_shift;
  }
  p.out_weight += scale * v.out_weight;
  p.out_bias += scale * v.out_bias;
}

void nag_update(Velocity& v, const Gradients& g, double momentum, double lr) {
  for (std::size_t b = 0; b < v.blocks.size(); ++b) {
    v.blocks[b].weight = momentum * v.blocks[b].weight - lr * g.blocks[b].weight;
    v.blocks[b].bias = momentum * v.blocks[b].bias - lr * g.blocks[b].bias;
    v.blocks[b].bn_gain = momentum * v.blocks[b].bn_gain - lr * g.blocks[b].bn_gain;
    v.blocks[b].bn_shift = momentum * v.blocks[b].bn_shift - lr * g.blocks[b].bn_shift;
  }
  v.out_weight = momentum * v.out_weight - lr * g.out_weight;
  v.out_bias = momentum * v.out_bias - lr * g.out_bias;
}

}  // namespace

TrainResult train(const Matrix& x_train, const Vector& y_train,
                  const Matrix& x_val, const Vector& y_val,
                  const MLPConfig& mconfig, const TrainConfig& tconfig) {
  mconfig.validate();
  tconfig.validate();
  const auto n = x_train.rows();
  if (n < 2) throw DomainError("train: need at least 2 training rows");
  if (x_val.rows() < 1) throw DomainError("train: empty validation set");
  if (y_train.size() != n || y_val.size() != x_val.rows())
    throw DimensionError("train: target counts do not match feature rows");

  Rng rng(tconfig.seed);
  Rng init_rng(Rng::derive_seed(tconfig.seed, 0x1717));
  MLPParams params = init_params(mconfig, init_rng);
  Velocity velocity = Velocity::zeros_like(params);

  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;

  TrainResult result;
  EarlyStopper stopper(tconfig.patience);
  MLPParams best = params;
  long iteration = 0;

  const int batch = std::min<int>(tconfig.batch_size, static_cast<int>(n));
  Matrix xb(batch, x_train.cols());
  Vector yb(batch);

  for (int epoch = 0; epoch < tconfig.max_epochs; ++epoch) {
    // Fisher-Yates with our own rng; std::shuffle is not reproducible
    // across standard libraries.
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = rng.uniform_int(0, i);
      std::swap(order[i], order[j]);
    }

    double loss_sum = 0.0;
    int batches = 0;
    double lr = tconfig.lr_min;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const int rows = static_cast<int>(std::min<Eigen::Index>(batch, n - start));
      if (rows < 2) break;  // a trailing singleton has no batch variance
      if (xb.rows() != rows) {
        xb.resize(rows, x_train.cols());
        yb.resize(rows);
      }
      for (int r = 0; r < rows; ++r) {
        xb.row(r) = x_train.row(order[start + r]);
        yb(r) = y_train(order[start + r]);
      }

      lr = cyclical_lr(iteration, tconfig);

      // Nesterov: gradients at the look-ahead point.
      MLPParams lookahead = params;
      add_scaled(lookahead, velocity, tconfig.momentum);
      LossGrads lg;
      try {
        lg = loss_and_gradients(lookahead, mconfig, xb, yb);
      } catch (const ConvergenceError& e) {
        throw ConvergenceError("epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batches) + ": " + e.what());
      }
      nag_update(velocity, lg.grads, tconfig.momentum, lr);
      add_scaled(params, velocity, 1.0);
      update_running_stats(params, lg.cache);

      loss_sum += lg.loss;
      ++batches;
      ++iteration;
    }

    const Vector val_preds = forward(params, x_val, Mode::kInfer);
    const double val_mse =
        (val_preds - y_val).squaredNorm() / double(x_val.rows());
    if (!std::isfinite(val_mse))
      throw ConvergenceError("epoch " + std::to_string(epoch) +
                             ": non-finite validation loss");

    result.history.epochs.push_back(
        {batches > 0 ? loss_sum / batches : 0.0, val_mse, lr});

    const auto decision = stopper.observe(val_mse);
    if (decision.new_best) best = params;
    if (decision.stop) {
      result.history.stopped_early = true;
      break;
    }
  }

  result.history.best_epoch = stopper.best_index();
  result.history.best_val_mse = stopper.best();
  result.params = std::move(best);
  return result;
}

double predict(const MLPParams& params, const Vector& scores,
               const TargetTransform& transform) {
  const Vector preds =
      forward(params, scores.transpose(), Mode::kInfer);
  return inverse_transform(preds(0), transform);
}

}  // namespace riomix
