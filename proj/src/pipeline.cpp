#include "riomix/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "riomix/errors.hpp"
#include "riomix/neuralnet.hpp"
#include "riomix/tensorio.hpp"

namespace riomix {

namespace fs = std::filesystem;

namespace {

constexpr int kCells = kSectors * kSectors;
constexpr std::uint64_t kMixupStream = 0x6d697875;            // mixup sub-seeds
constexpr std::uint64_t kCellStreamBase = 0x63656c6c00000000; // per-cell sub-seeds

std::string cell_label(int row, int col) {
  auto two = [](int v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
  };
  return "a_" + two(row + 1) + "_" + two(col + 1);
}

std::string status_name(ModelBundle::Status s) {
  switch (s) {
    case ModelBundle::Status::kTrained: return "trained";
    case ModelBundle::Status::kConstant: return "constant";
    case ModelBundle::Status::kSkipped: return "skipped";
  }
  return "unknown";
}

ModelBundle::Status status_from_name(const std::string& name) {
  if (name == "trained") return ModelBundle::Status::kTrained;
  if (name == "constant") return ModelBundle::Status::kConstant;
  if (name == "skipped") return ModelBundle::Status::kSkipped;
  throw IoError("unknown bundle status '" + name + "'");
}

}  // namespace

std::string ModelBundle::label() const { return cell_label(row, col); }

std::vector<RegionRecord> ingest(const std::string& path) {
  return read_region_csv_file(path);
}

namespace {

TensorPack params_to_tensors(const MLPParams& params) {
  TensorPack pack;
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    const auto& block = params.blocks[b];
    const std::string base = "blocks." + std::to_string(b) + ".";
    pack.add_matrix(base + "weight", block.weight);
    pack.add_vector(base + "bias", block.bias);
    pack.add_vector(base + "bn_gain", block.bn_gain);
    pack.add_vector(base + "bn_shift", block.bn_shift);
    pack.add_vector(base + "bn_mean", block.bn_mean);
    pack.add_vector(base + "bn_var", block.bn_var);
  }
  pack.add_vector("out.weight", params.out_weight);
  pack.add_scalar("out.bias", params.out_bias);
  return pack;
}

MLPParams params_from_tensors(const TensorPack& pack) {
  MLPParams params;
  for (int b = 0;; ++b) {
    const std::string base = "blocks." + std::to_string(b) + ".";
    if (!pack.contains(base + "weight")) break;
    BlockParams block;
    block.weight = pack.matrix(base + "weight");
    block.bias = pack.vector(base + "bias");
    block.bn_gain = pack.vector(base + "bn_gain");
    block.bn_shift = pack.vector(base + "bn_shift");
    block.bn_mean = pack.vector(base + "bn_mean");
    block.bn_var = pack.vector(base + "bn_var");
    params.blocks.push_back(std::move(block));
  }
  if (params.blocks.empty()) throw IoError("bundle has no network blocks");
  params.out_weight = pack.vector("out.weight");
  params.out_bias = pack.scalar("out.bias");
  return params;
}

std::string find_value(const std::vector<std::string>& lines, const std::string& key) {
  for (const auto& line : lines) {
    if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
  }
  throw IoError("manifest missing '" + key + "'");
}

void write_cell_bundle(const fs::path& cells_dir, const ModelBundle& bundle,
                       const std::string& config_hash) {
  std::vector<std::string> lines;
  lines.push_back("riomix-bundle 1");
  lines.push_back("config_hash " + config_hash);
  lines.push_back("cell " + std::to_string(bundle.row + 1) + " " +
                  std::to_string(bundle.col + 1));
  lines.push_back("status " + status_name(bundle.status));
  if (bundle.status != ModelBundle::Status::kSkipped) {
    lines.push_back("a_min " + format_double(bundle.transform.a_min));
    lines.push_back("a_max " + format_double(bundle.transform.a_max));
    lines.push_back("a_lower " + format_double(bundle.transform.a_lower));
    lines.push_back("a_upper " + format_double(bundle.transform.a_upper));
  }
  if (bundle.status == ModelBundle::Status::kConstant)
    lines.push_back("constant " + format_double(bundle.constant));
  if (bundle.status == ModelBundle::Status::kTrained) {
    const TensorPack pack = params_to_tensors(*bundle.params);
    for (auto& l : pack.manifest_lines()) lines.push_back(l);
    pack.write_binary((cells_dir / (bundle.label() + ".bin")).string());
  }
  write_text_lines((cells_dir / (bundle.label() + ".manifest")).string(), lines);
}

ModelBundle read_cell_bundle(const fs::path& cells_dir, int row, int col) {
  const std::string label = cell_label(row, col);
  const fs::path manifest_path = cells_dir / (label + ".manifest");
  const auto lines = read_text_lines(manifest_path.string());
  if (lines.empty() || lines.front() != "riomix-bundle 1")
    throw IoError(manifest_path.string() + ": not a riomix bundle manifest");

  ModelBundle bundle;
  bundle.row = row;
  bundle.col = col;
  bundle.status = status_from_name(find_value(lines, "status"));
  if (bundle.status != ModelBundle::Status::kSkipped) {
    const double a_min = parse_double(find_value(lines, "a_min"), label);
    const double a_max = parse_double(find_value(lines, "a_max"), label);
    bundle.transform = TargetTransform::from_extrema(a_min, a_max);
  }
  if (bundle.status == ModelBundle::Status::kConstant)
    bundle.constant = parse_double(find_value(lines, "constant"), label);
  if (bundle.status == ModelBundle::Status::kTrained) {
    const TensorPack pack =
        TensorPack::load(lines, (cells_dir / (label + ".bin")).string());
    bundle.params = params_from_tensors(pack);
  }
  return bundle;
}

}  // namespace

void save_bundles(const std::string& model_dir, const BundleSet& bundles,
                  const RunSummary& summary,
                  const std::vector<std::vector<EpochStats>>& histories) {
  const fs::path dir(model_dir);
  fs::create_directories(dir / "cells");
  fs::create_directories(dir / "history");

  std::vector<std::string> run_lines{
      "riomix-run 1",
      "config_hash " + bundles.config_hash,
      "minor_classes " + std::to_string(bundles.minor_classes),
      "large_classes " + std::to_string(bundles.large_classes),
      "cells " + std::to_string(kCells),
      "trained " + std::to_string(summary.trained),
      "constant " + std::to_string(summary.constant),
      "skipped " + std::to_string(summary.skipped),
  };
  write_text_lines((dir / "manifest.txt").string(), run_lines);

  TensorPack shared;
  shared.add_vector("totals.sfirm", bundles.totals.sfirm);
  shared.add_vector("totals.semp", bundles.totals.semp);
  shared.add_vector("pca.mean", bundles.pca.mean);
  shared.add_vector("pca.scale", bundles.pca.scale);
  shared.add_matrix("pca.components", bundles.pca.components);
  shared.add_vector("pca.explained_ratio", bundles.pca.explained_ratio);
  std::vector<std::string> shared_lines{"riomix-shared 1",
                                        "config_hash " + bundles.config_hash};
  for (auto& l : shared.manifest_lines()) shared_lines.push_back(l);
  write_text_lines((dir / "shared.manifest").string(), shared_lines);
  shared.write_binary((dir / "shared.bin").string());

  for (const auto& bundle : bundles.cells)
    write_cell_bundle(dir / "cells", bundle, bundles.config_hash);

  std::ostringstream report;
  report << "cell,row,col,status,a_min,a_max,val_mse,test_mse,epochs,best_epoch\n";
  for (const auto& c : summary.cells) {
    report << cell_label(c.row, c.col) << ',' << (c.row + 1) << ',' << (c.col + 1)
           << ',' << status_name(c.status) << ',';
    if (c.status != ModelBundle::Status::kSkipped)
      report << format_double(c.a_min) << ',' << format_double(c.a_max);
    else
      report << ',';
    report << ',';
    if (c.status == ModelBundle::Status::kTrained)
      report << format_double(c.val_mse) << ',' << format_double(c.test_mse) << ','
             << c.epochs << ',' << c.best_epoch;
    else
      report << ",,,";
    report << '\n';
  }
  std::ofstream report_out(dir / "report.csv", std::ios::binary);
  if (!report_out) throw IoError("cannot write report.csv");
  report_out << report.str();

  for (std::size_t c = 0; c < histories.size(); ++c) {
    if (histories[c].empty()) continue;
    const std::string label = cell_label(static_cast<int>(c) / kSectors,
                                         static_cast<int>(c) % kSectors);
    std::ofstream hist(dir / "history" / (label + ".csv"), std::ios::binary);
    if (!hist) throw IoError("cannot write history for " + label);
    hist << "epoch,train_loss,val_mse,lr\n";
    for (std::size_t e = 0; e < histories[c].size(); ++e)
      hist << e << ',' << format_double(histories[c][e].train_loss) << ','
           << format_double(histories[c][e].val_mse) << ','
           << format_double(histories[c][e].lr_last) << '\n';
  }
}

BundleSet load_bundles(const std::string& model_dir) {
  const fs::path dir(model_dir);
  if (!fs::exists(dir / "manifest.txt"))
    throw IoError("'" + model_dir + "' has no manifest.txt");
  const auto run_lines = read_text_lines((dir / "manifest.txt").string());
  if (run_lines.empty() || run_lines.front() != "riomix-run 1")
    throw IoError("'" + model_dir + "' is not a riomix run directory");

  BundleSet set;
  set.config_hash = find_value(run_lines, "config_hash");
  set.minor_classes = std::stoi(find_value(run_lines, "minor_classes"));
  set.large_classes = std::stoi(find_value(run_lines, "large_classes"));

  const auto shared_lines = read_text_lines((dir / "shared.manifest").string());
  if (find_value(shared_lines, "config_hash") != set.config_hash)
    throw IoError("shared.manifest config hash does not match the run manifest");
  const TensorPack shared =
      TensorPack::load(shared_lines, (dir / "shared.bin").string());
  set.totals.sfirm = shared.vector("totals.sfirm");
  set.totals.semp = shared.vector("totals.semp");
  set.pca.mean = shared.vector("pca.mean");
  set.pca.scale = shared.vector("pca.scale");
  set.pca.components = shared.matrix("pca.components");
  set.pca.explained_ratio = shared.vector("pca.explained_ratio");

  std::vector<std::string> missing;
  for (int c = 0; c < kCells; ++c) {
    const int row = c / kSectors, col = c % kSectors;
    if (!fs::exists(dir / "cells" / (cell_label(row, col) + ".manifest")))
      missing.push_back(cell_label(row, col));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw IoError("model directory is missing " + std::to_string(missing.size()) +
                  " cell bundles: " + list);
  }

  set.cells.reserve(kCells);
  for (int c = 0; c < kCells; ++c)
    set.cells.push_back(read_cell_bundle(dir / "cells", c / kSectors, c % kSectors));
  return set;
}

namespace {

struct CellOutcome {
  ModelBundle bundle;
  CellReport report;
  std::vector<EpochStats> history;
};

}  // namespace

RunSummary run_training(const PipelineConfig& config,
                        const std::vector<RegionRecord>& pool_in) {
  config.validate();

  std::vector<RegionRecord> pool;
  for (const auto& r : pool_in) {
    if (std::find(config.exclude_regions.begin(), config.exclude_regions.end(),
                  r.region_id) == config.exclude_regions.end())
      pool.push_back(r);
  }
  if (pool.empty()) throw DomainError("run_training: pool is empty after exclusions");
  for (const auto& r : pool) r.validate();

  const int minor = static_cast<int>(pool.front().sfirm.size());
  const int large = static_cast<int>(pool.front().va.size());

  const AncestryIndex ancestry(pool);
  PoolTotals totals;
  if (config.sfirm_totals && config.semp_totals) {
    totals.sfirm = Eigen::Map<const Vector>(config.sfirm_totals->data(),
                                            config.sfirm_totals->size());
    totals.semp = Eigen::Map<const Vector>(config.semp_totals->data(),
                                           config.semp_totals->size());
  } else {
    totals = compute_pool_totals(pool);
  }

  std::vector<RegionRecord> standardized;
  standardized.reserve(pool.size());
  for (const auto& r : pool) standardized.push_back(standardize_by_pop15(r));

  MixupConfig mixup_config = config.mixup;
  mixup_config.seed = Rng::derive_seed(config.seed, kMixupStream);
  const auto dataset = generate_dataset(standardized, ancestry, mixup_config);

  const int n = static_cast<int>(dataset.size());
  Matrix features(n, feature_dimension(minor, large));
  Matrix targets(n, kCells);
  for (int i = 0; i < n; ++i) {
    features.row(i) = compute_features(dataset[i].record, totals);
    const Matrix coeffs = coefficient_matrix(dataset[i].record.io);
    for (int c = 0; c < kCells; ++c)
      targets(i, c) = coeffs(c / kSectors, c % kSectors);
  }

  const int train_n = config.train_count;
  const int val_n = std::max<int>(1, std::llround(config.validation_fraction * train_n));
  const int fit_n = train_n - val_n;
  const int test_n = config.test_count;
  if (fit_n < 2)
    throw DomainError("run_training: validation fraction leaves fewer than 2 training rows");

  const PCAModel pca = fit_pca(features.topRows(fit_n), config.pca_components);
  const Matrix scores = project_rows(pca, features);
  features.resize(0, 0);

  const Matrix scores_fit = scores.topRows(fit_n);
  const Matrix scores_val = scores.middleRows(fit_n, val_n);
  const Matrix scores_test = scores.middleRows(train_n, test_n);

  // Cells that are zero across the whole pool are never trained; their
  // prediction is pinned to zero.
  std::vector<bool> pool_nonzero(kCells, false);
  for (const auto& r : pool) {
    const Matrix coeffs = coefficient_matrix(r.io);
    for (int c = 0; c < kCells; ++c)
      if (coeffs(c / kSectors, c % kSectors) > 0.0) pool_nonzero[c] = true;
  }

  std::vector<CellOutcome> outcomes(kCells);
  std::atomic<int> next_cell{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const int c = next_cell.fetch_add(1);
      if (c >= kCells) return;
      {
        std::lock_guard lock(error_mutex);
        if (first_error) return;
      }
      try {
        auto& out = outcomes[c];
        const int row = c / kSectors, col = c % kSectors;
        out.bundle.row = out.report.row = row;
        out.bundle.col = out.report.col = col;

        if (!pool_nonzero[c]) {
          out.bundle.status = ModelBundle::Status::kSkipped;
          out.report.status = out.bundle.status;
          continue;
        }

        const Vector y_fit = targets.col(c).head(fit_n);
        const TargetTransform transform = TargetTransform::fit(y_fit);
        out.bundle.transform = transform;
        out.report.a_min = transform.a_min;
        out.report.a_max = transform.a_max;

        if (transform.degenerate()) {
          out.bundle.status = ModelBundle::Status::kConstant;
          out.bundle.constant = transform.a_lower;
          out.report.status = out.bundle.status;
          continue;
        }

        Vector t_fit(fit_n), t_val(val_n), t_test(test_n);
        for (int i = 0; i < fit_n; ++i)
          t_fit(i) = transform_target(targets(i, c), transform);
        for (int i = 0; i < val_n; ++i)
          t_val(i) = transform_target(targets(fit_n + i, c), transform);
        for (int i = 0; i < test_n; ++i)
          t_test(i) = transform_target(targets(train_n + i, c), transform);

        MLPConfig mcfg = config.network;
        mcfg.input_dim = config.pca_components;
        TrainConfig tcfg = config.training;
        tcfg.seed = Rng::derive_seed(config.seed, kCellStreamBase + c);

        TrainResult result = train(scores_fit, t_fit, scores_val, t_val, mcfg, tcfg);

        out.bundle.status = ModelBundle::Status::kTrained;
        out.bundle.params = std::move(result.params);
        out.report.status = out.bundle.status;
        out.report.val_mse = result.history.best_val_mse;
        out.report.epochs = static_cast<int>(result.history.epochs.size());
        out.report.best_epoch = result.history.best_epoch;
        if (test_n > 0) {
          const Vector preds = forward(*out.bundle.params, scores_test, Mode::kInfer);
          out.report.test_mse = (preds - t_test).squaredNorm() / double(test_n);
        }
        out.history = std::move(result.history.epochs);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int n_workers = config.workers > 0
                      ? config.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, kCells);
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  RunSummary summary;
  summary.config_hash = config.config_hash();
  BundleSet bundles;
  bundles.config_hash = summary.config_hash;
  bundles.minor_classes = minor;
  bundles.large_classes = large;
  bundles.totals = totals;
  bundles.pca = pca;
  std::vector<std::vector<EpochStats>> histories(kCells);
  for (int c = 0; c < kCells; ++c) {
    auto& out = outcomes[c];
    switch (out.bundle.status) {
      case ModelBundle::Status::kTrained: ++summary.trained; break;
      case ModelBundle::Status::kConstant: ++summary.constant; break;
      case ModelBundle::Status::kSkipped: ++summary.skipped; break;
    }
    summary.cells.push_back(out.report);
    bundles.cells.push_back(std::move(out.bundle));
    histories[c] = std::move(out.history);
  }

  if (!config.output_dir.empty())
    save_bundles(config.output_dir, bundles, summary, histories);
  return summary;
}

RunSummary run_training(const PipelineConfig& config) {
  if (config.pool_csv.empty())
    throw DomainError("run_training: config has no pool_csv path");
  return run_training(config, ingest(config.pool_csv));
}

Matrix run_inference(const BundleSet& bundles, const RegionRecord& target) {
  if (static_cast<int>(bundles.cells.size()) != kCells)
    throw IoError("bundle set has " + std::to_string(bundles.cells.size()) +
                  " cells, expected " + std::to_string(kCells));
  const Vector features = compute_features(target, bundles.totals);
  const Vector scores = project(bundles.pca, features);

  Matrix out = Matrix::Zero(kSectors, kSectors);
  for (const auto& bundle : bundles.cells) {
    double value = 0.0;
    switch (bundle.status) {
      case ModelBundle::Status::kSkipped: value = 0.0; break;
      case ModelBundle::Status::kConstant: value = bundle.constant; break;
      case ModelBundle::Status::kTrained:
        value = predict(*bundle.params, scores, bundle.transform);
        break;
    }
    out(bundle.row, bundle.col) = value;
  }
  return out;
}

Matrix run_inference(const std::string& model_dir, const RegionRecord& target) {
  return run_inference(load_bundles(model_dir), target);
}

namespace {

FiveMetrics to_five(const EvaluationReport& r) {
  return {r.stpe, r.mad, r.u2, r.rmse, r.mape};
}

MetricRange summarize(const std::vector<FiveMetrics>& all) {
  MetricRange range;
  auto fold = [&](auto member) {
    double lo = all.front().*member, hi = all.front().*member, sum = 0.0;
    for (const auto& m : all) {
      lo = std::min(lo, m.*member);
      hi = std::max(hi, m.*member);
      sum += m.*member;
    }
    range.min.*member = lo;
    range.max.*member = hi;
    range.mean.*member = sum / static_cast<double>(all.size());
  };
  fold(&FiveMetrics::stpe);
  fold(&FiveMetrics::mad);
  fold(&FiveMetrics::u2);
  fold(&FiveMetrics::rmse);
  fold(&FiveMetrics::mape);
  return range;
}

}  // namespace

BaselineSummary run_baselines(const std::vector<RegionRecord>& references,
                              const IOTable& target, const BaselineConfig& config,
                              const std::optional<CellMask>& mask) {
  if (references.empty())
    throw DomainError("run_baselines: no reference regions");
  target.validate();
  const Matrix actual = coefficient_matrix(target);
  const Vector u = target.intermediate.rowwise().sum();
  const Vector v = target.intermediate.colwise().sum();

  BaselineSummary summary;
  std::vector<FiveMetrics> flq_all, ras_all;
  for (const auto& ref : references) {
    BaselineRun run;
    run.reference_id = ref.region_id;
    const Matrix ref_coeffs = coefficient_matrix(ref.io);

    FLQInputs inputs =
        (config.direction == BaselineDirection::kToNational)
            ? FLQInputs::from_outputs(ref.io.gross_output, target.gross_output,
                                      config.flq_delta, config.flq_mode)
            : FLQInputs::from_outputs(target.gross_output, ref.io.gross_output,
                                      config.flq_delta, config.flq_mode);
    run.flq_estimate = (config.direction == BaselineDirection::kToNational)
                           ? flq_nationalize(ref_coeffs, inputs)
                           : flq_regionalize(ref_coeffs, inputs);
    run.flq_report = evaluate(run.flq_estimate, actual, mask);

    RASProblem problem;
    problem.initial = Matrix::Zero(kSectors, kSectors);
    for (int j = 0; j < kSectors; ++j)
      problem.initial.col(j) = ref_coeffs.col(j) * target.gross_output(j);
    problem.row_targets = u;
    problem.col_targets = v;
    problem.gross_outputs = target.gross_output;
    problem.tolerance = config.ras_tolerance;
    problem.max_iterations = config.ras_max_iterations;
    const RASResult ras = ras_fit(problem);
    run.ras_estimate = ras.coefficients;
    run.ras_iterations = ras.iterations;
    run.ras_residual = ras.residual;
    run.ras_report = evaluate(run.ras_estimate, actual, mask);

    flq_all.push_back(to_five(run.flq_report));
    ras_all.push_back(to_five(run.ras_report));
    summary.runs.push_back(std::move(run));
  }
  summary.flq = summarize(flq_all);
  summary.ras = summarize(ras_all);
  return summary;
}

}  // namespace riomix
