#include "riomix/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "riomix/errors.hpp"

namespace riomix {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key))
      throw IoError("config: unknown key '" + key + "' in " + where);
  }
}

json target_mode_to_json(const TargetPopMode& mode) {
  json j;
  if (const auto* f = std::get_if<FixedPop15>(&mode)) {
    j["mode"] = "fixed";
    j["value"] = f->value;
  } else {
    const auto& u = std::get<UniformPop15>(mode);
    j["mode"] = "uniform";
    j["low"] = u.lower;
    j["high"] = u.upper;
  }
  return j;
}

TargetPopMode target_mode_from_json(const json& j) {
  const std::string mode = j.value("mode", "fixed");
  if (mode == "fixed") {
    check_keys(j, "mixup.target_pop15", {"mode", "value"});
    return FixedPop15{j.value("value", 1.0)};
  }
  if (mode == "uniform") {
    check_keys(j, "mixup.target_pop15", {"mode", "low", "high"});
    return UniformPop15{j.value("low", 0.0), j.value("high", 1.0)};
  }
  throw IoError("config: target_pop15.mode must be 'fixed' or 'uniform'");
}

}  // namespace

void PipelineConfig::validate() const {
  mixup.validate();
  network.validate();
  training.validate();
  if (train_count < 1 || test_count < 0)
    throw DomainError("config: split sizes must be positive");
  if (train_count + test_count > mixup.count)
    throw DomainError("config: train + test (" +
                      std::to_string(train_count + test_count) +
                      ") exceeds the generated count (" +
                      std::to_string(mixup.count) + ")");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw DomainError("config: validation_fraction must be in (0, 1)");
  if (pca_components < 1) throw DomainError("config: pca_components must be >= 1");
  if (network.input_dim != pca_components)
    throw DomainError("config: network input_dim must equal pca_components");
  if (!(baselines.flq_delta > 0.0))
    throw DomainError("config: flq_delta must be positive");
  if (!(baselines.ras_tolerance > 0.0) || baselines.ras_max_iterations < 1)
    throw DomainError("config: bad RAS settings");
}

std::string PipelineConfig::to_json_string() const {
  json j;
  j["paths"] = {{"pool_csv", pool_csv},
                {"target_csv", target_csv},
                {"output_dir", output_dir}};
  j["exclude_regions"] = exclude_regions;
  j["seed"] = seed;
  j["workers"] = workers;
  j["mixup"] = {{"alpha", mixup.alpha},
                {"k_min", mixup.k_min},
                {"k_max", mixup.k_max},
                {"count", mixup.count},
                {"target_pop15", target_mode_to_json(mixup.target_mode)}};
  j["split"] = {{"train", train_count},
                {"test", test_count},
                {"validation_fraction", validation_fraction}};
  j["features"] = {{"pca_components", pca_components}};
  if (sfirm_totals) j["features"]["sfirm_totals"] = *sfirm_totals;
  if (semp_totals) j["features"]["semp_totals"] = *semp_totals;
  j["network"] = {{"blocks", network.blocks},
                  {"width", network.block_width},
                  {"l2_lambda", network.l2_lambda}};
  j["training"] = {{"lr_min", training.lr_min},
                   {"lr_max", training.lr_max},
                   {"lr_step_size", training.lr_step_size},
                   {"lr_gamma", training.lr_gamma},
                   {"momentum", training.momentum},
                   {"batch_size", training.batch_size},
                   {"max_epochs", training.max_epochs},
                   {"patience", training.patience}};
  j["baselines"] = {
      {"flq_delta", baselines.flq_delta},
      {"flq_lambda_exponent",
       baselines.flq_mode == FLQExponentMode::kPrintedSquare ? "printed_square"
                                                             : "flegg_delta"},
      {"ras_tolerance", baselines.ras_tolerance},
      {"ras_max_iterations", baselines.ras_max_iterations},
      {"direction", baselines.direction == BaselineDirection::kToNational
                        ? "to_national"
                        : "to_regional"}};
  return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("config: invalid JSON: ") + e.what());
  }

  check_keys(j, "top level",
             {"paths", "exclude_regions", "seed", "workers", "mixup", "split",
              "features", "network", "training", "baselines"});

  PipelineConfig c;
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    check_keys(p, "paths", {"pool_csv", "target_csv", "output_dir"});
    c.pool_csv = p.value("pool_csv", "");
    c.target_csv = p.value("target_csv", "");
    c.output_dir = p.value("output_dir", "");
  }
  c.exclude_regions = j.value("exclude_regions", std::vector<std::string>{});
  c.seed = j.value("seed", std::uint64_t{0});
  c.workers = j.value("workers", 0);

  if (j.contains("mixup")) {
    const auto& m = j["mixup"];
    check_keys(m, "mixup", {"alpha", "k_min", "k_max", "count", "target_pop15"});
    c.mixup.alpha = m.value("alpha", c.mixup.alpha);
    c.mixup.k_min = m.value("k_min", c.mixup.k_min);
    c.mixup.k_max = m.value("k_max", c.mixup.k_max);
    c.mixup.count = m.value("count", c.mixup.count);
    if (m.contains("target_pop15"))
      c.mixup.target_mode = target_mode_from_json(m["target_pop15"]);
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    check_keys(s, "split", {"train", "test", "validation_fraction"});
    c.train_count = s.value("train", c.train_count);
    c.test_count = s.value("test", c.test_count);
    c.validation_fraction = s.value("validation_fraction", c.validation_fraction);
  }
  if (j.contains("features")) {
    const auto& f = j["features"];
    check_keys(f, "features", {"pca_components", "sfirm_totals", "semp_totals"});
    c.pca_components = f.value("pca_components", c.pca_components);
    if (f.contains("sfirm_totals"))
      c.sfirm_totals = f["sfirm_totals"].get<std::vector<double>>();
    if (f.contains("semp_totals"))
      c.semp_totals = f["semp_totals"].get<std::vector<double>>();
  }
  if (j.contains("network")) {
    const auto& n = j["network"];
    check_keys(n, "network", {"blocks", "width", "l2_lambda"});
    c.network.blocks = n.value("blocks", c.network.blocks);
    c.network.block_width = n.value("width", c.network.block_width);
    c.network.l2_lambda = n.value("l2_lambda", c.network.l2_lambda);
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    check_keys(t, "training",
               {"lr_min", "lr_max", "lr_step_size", "lr_gamma", "momentum",
                "batch_size", "max_epochs", "patience"});
    c.training.lr_min = t.value("lr_min", c.training.lr_min);
    c.training.lr_max = t.value("lr_max", c.training.lr_max);
    c.training.lr_step_size = t.value("lr_step_size", c.training.lr_step_size);
    c.training.lr_gamma = t.value("lr_gamma", c.training.lr_gamma);
    c.training.momentum = t.value("momentum", c.training.momentum);
    c.training.batch_size = t.value("batch_size", c.training.batch_size);
    c.training.max_epochs = t.value("max_epochs", c.training.max_epochs);
    c.training.patience = t.value("patience", c.training.patience);
  }
  if (j.contains("baselines")) {
    const auto& b = j["baselines"];
    check_keys(b, "baselines",
               {"flq_delta", "flq_lambda_exponent", "ras_tolerance",
                "ras_max_iterations", "direction"});
    c.baselines.flq_delta = b.value("flq_delta", c.baselines.flq_delta);
    const std::string mode = b.value("flq_lambda_exponent", "printed_square");
    if (mode == "printed_square")
      c.baselines.flq_mode = FLQExponentMode::kPrintedSquare;
    else if (mode == "flegg_delta")
      c.baselines.flq_mode = FLQExponentMode::kFleggDelta;
    else
      throw IoError("config: flq_lambda_exponent must be 'printed_square' or 'flegg_delta'");
    c.baselines.ras_tolerance = b.value("ras_tolerance", c.baselines.ras_tolerance);
    c.baselines.ras_max_iterations =
        b.value("ras_max_iterations", c.baselines.ras_max_iterations);
    const std::string dir = b.value("direction", "to_national");
    if (dir == "to_national")
      c.baselines.direction = BaselineDirection::kToNational;
    else if (dir == "to_regional")
      c.baselines.direction = BaselineDirection::kToRegional;
    else
      throw IoError("config: direction must be 'to_national' or 'to_regional'");
  }

  // The network consumes the principal component scores.
  c.network.input_dim = c.pca_components;
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

void PipelineConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_json_string();
}

std::string PipelineConfig::config_hash() const {
  // Canonical dump without paths/workers, hashed with 64-bit FNV-1a.
  json j = json::parse(to_json_string());
  j.erase("paths");
  j.erase("workers");
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace riomix
