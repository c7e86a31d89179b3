#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "fvl/baselines/extrapolate.hpp"
#include "fvl/common/error.hpp"
#include "fvl/common/random.hpp"
#include "fvl/common/text.hpp"
#include "fvl/data/dataset.hpp"
#include "fvl/data/scenario.hpp"
#include "fvl/metrics/metrics.hpp"
#include "fvl/model/config.hpp"
#include "fvl/model/model_check.hpp"
#include "fvl/model/trainer.hpp"
#include "fvl/nn/checkpoint.hpp"

namespace fvl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kWeightsFile = "model.fvlw";
constexpr const char* kConfigFile = "model.cfg";
constexpr const char* kCurveFile = "loss_curve.csv";

// Which part of a split video dataset to use.
enum class Part { train, test, all };

Part parse_part(const std::string& name) {
  if (name == "train") return Part::train;
  if (name == "test") return Part::test;
  if (name == "all") return Part::all;
  throw ValidationError("unknown split '" + name + "', expected train, test or all");
}

bool is_video_root(const fs::path& path) {
  return fs::is_directory(path) && !fs::exists(path / "samples.jsonl");
}

std::vector<std::string> video_names(const fs::path& root, Part part) {
  std::vector<std::string> names;
  if (fs::exists(root / "split.txt")) {
    const auto split = data::load_split(root);
    if (part != Part::test) names.insert(names.end(), split.train.begin(), split.train.end());
    if (part != Part::train) names.insert(names.end(), split.test.begin(), split.test.end());
  } else {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "meta")) names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

struct Pooling {
  double expand = flow::kDefaultRoiExpand;
  int n = flow::kDefaultPoolSize;
};

// Samples from a video root (windowed, ids numbered in video order) or a
// samples file. When `pooling` is set, videos pooled differently are
// re-pooled in memory from their flow grids.
std::vector<data::Sample> load_data(const fs::path& path, Part part, int tau, int delta,
                                    const std::optional<Pooling>& pooling) {
  if (!is_video_root(path)) return data::read_dataset(path, tau, delta);
  std::vector<data::Sample> out;
  for (const auto& name : video_names(path, part)) {
    data::Video video = data::load_video(path / name, false);
    if (pooling && (video.pool_n != pooling->n || video.pool_expand != pooling->expand)) {
      video = data::load_video(path / name, true);
      data::pool_video(video, pooling->expand, pooling->n);
    }
    for (auto& s : data::video_samples(video, tau, delta)) {
      s.id = out.size();
      out.push_back(std::move(s));
    }
  }
  if (out.empty()) throw ValidationError("no samples in " + path.string());
  return out;
}

int pool_size_of(const model::ModelConfig& config) {
  const int n = static_cast<int>(std::lround(std::sqrt(config.pooled_dim / 2.0)));
  if (2 * n * n != config.pooled_dim) {
    throw ConfigError("pooled dim " + std::to_string(config.pooled_dim) + " is not 2 n^2");
  }
  return n;
}

std::vector<BoundingBox> baseline_prediction(baselines::Baseline b, const data::Sample& s, int delta) {
  return baselines::extrapolate(b, s.past, delta);
}

metrics::EvalReport evaluate_samples(const std::string& name, const std::vector<data::Sample>& samples,
                                     const std::vector<std::vector<BoundingBox>>& predictions) {
  std::vector<metrics::SampleRecord> records;
  records.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const data::Sample& s = samples[i];
    if (s.future.empty()) throw ValidationError("sample " + std::to_string(s.id) + " has no ground-truth future");
    const auto reference = baselines::extrapolate(baselines::Baseline::const_accel, s.past, s.delta());
    metrics::SampleRecord r;
    r.id = s.id;
    r.video = s.video;
    r.track = s.track;
    r.start_frame = s.start_frame;
    const auto d = metrics::displacement_errors(predictions[i], s.future);
    r.fde = d.fde;
    r.ade = d.ade;
    r.fiou = metrics::final_iou(predictions[i].back(), s.future.back());
    r.reference_fde = metrics::displacement_errors(reference, s.future).fde;
    records.push_back(r);
  }
  return metrics::build_report(name, std::move(records));
}

struct Checkpoint {
  model::ModelConfig config;
  nn::ParamSet params;
};

Checkpoint load_checkpoint(const fs::path& dir) {
  Checkpoint c;
  c.config = model::load_config(dir / kConfigFile);
  c.params = nn::load_params(dir / kWeightsFile);
  return c;
}

void write_curve(const fs::path& path, const std::vector<model::EpochStats>& curve) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "epoch,train_loss,train_ade,selection_ade\n";
  for (const auto& e : curve) {
    out << e.epoch << ',' << text::format_double(e.train_loss) << ',' << text::format_double(e.train_ade) << ','
        << text::format_double(e.selection_ade) << '\n';
  }
}

std::vector<std::size_t> parse_ids(const std::string& list) {
  std::vector<std::size_t> ids;
  std::stringstream in(list);
  std::string field;
  while (std::getline(in, field, ',')) {
    const int id = text::parse_int(text::trim(field), "--ids");
    if (id < 0) throw ValidationError("sample ids must be non-negative");
    ids.push_back(static_cast<std::size_t>(id));
  }
  return ids;
}

struct Options {
  // generate
  std::vector<std::string> scenarios;
  std::string suite;
  data::SuiteOptions suite_options;
  bool no_pool = false;
  // shared
  std::string dataset;
  std::string out;
  std::string split;
  std::string variant = "xoe";
  std::string checkpoint;
  std::string baseline;
  std::string ids;
  model::ModelConfig config;
  model::TrainOptions train;
  std::uint64_t seed = 0;
  Pooling pooling;
  // gradcheck
  model::ModelConfig check_config = small_config();
  std::string check_variant = "all";
  std::uint64_t check_seed = 7;
  std::size_t batch = 2;
  double step = 1e-6;
  double tolerance = 1e-4;

  static model::ModelConfig small_config() {
    model::ModelConfig c;
    c.hidden = 8;
    c.embed = 8;
    c.tau = 3;
    c.delta = 2;
    return c;
  }
};

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.scenarios.empty() == o.suite.empty()) throw ValidationError("give exactly one of --scenario or --suite");
  std::vector<data::Scenario> scenarios;
  Rng master(o.seed);
  const std::uint64_t suite_seed = master.next();
  const std::uint64_t video_seed = master.next();
  if (!o.suite.empty()) {
    if (o.suite != "turn-heavy") throw ValidationError("unknown suite '" + o.suite + "'");
    scenarios = data::turn_heavy_suite(o.suite_options, suite_seed);
  } else {
    for (const auto& file : o.scenarios) scenarios.push_back(data::parse_scenario(file));
  }
  data::GenerateOptions g;
  g.tau = o.config.tau;
  g.delta = o.config.delta;
  g.pool = !o.no_pool;
  g.roi_expand = o.pooling.expand;
  g.pool_n = o.pooling.n;
  const auto names = data::generate_dataset(o.out, scenarios, video_seed, g);
  const auto split = data::load_split(o.out);
  out << "generated " << names.size() << " videos (" << split.train.size() << " train, " << split.test.size()
      << " test) in " << o.out << '\n';
  return kOk;
}

int cmd_pool(const Options& o, std::ostream& out) {
  fs::path root = o.dataset;
  if (!is_video_root(root)) throw ValidationError(root.string() + " is not a video dataset directory");
  if (!o.out.empty() && fs::path(o.out) != root) {
    fs::copy(root, o.out, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    root = o.out;
  }
  data::pool_dataset(root, o.pooling.expand, o.pooling.n);
  out << "pooled " << video_names(root, Part::all).size() << " videos in " << root.string() << " (expand "
      << o.pooling.expand << ", " << o.pooling.n << "x" << o.pooling.n << ")\n";
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  model::ModelConfig config = o.config;
  config.variant = model::parse_variant(o.variant);
  config.pooled_dim = 2 * o.pooling.n * o.pooling.n;
  config.validate();
  const Part part = parse_part(o.split.empty() ? "train" : o.split);
  std::optional<Pooling> pooling;
  if (model::uses_flow(config.variant)) pooling = o.pooling;
  const auto samples = load_data(o.dataset, part, config.tau, config.delta, pooling);

  model::TrainOptions options = o.train;
  options.seed = o.seed;
  options.on_epoch = [&](const model::EpochStats& e) {
    out << "epoch " << e.epoch << "  loss " << text::format_double(e.train_loss) << "  train ADE "
        << text::format_double(e.train_ade) << "  selection ADE " << text::format_double(e.selection_ade) << '\n';
  };
  const auto result = model::train(config, samples, options);

  const fs::path dir = o.out;
  fs::create_directories(dir);
  nn::save_params(dir / kWeightsFile, result.params);
  model::save_config(dir / kConfigFile, config);
  write_curve(dir / kCurveFile, result.curve);
  out << "trained " << model::name_of(config.variant) << " on " << result.train_samples << " samples ("
      << result.selection_samples << " for selection), best epoch " << result.best_epoch << ", wrote "
      << dir.string() << '\n';
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  if (o.checkpoint.empty() == o.baseline.empty()) throw ValidationError("give exactly one of --checkpoint or --baseline");
  const Part part = parse_part(o.split.empty() ? "test" : o.split);
  std::vector<data::Sample> samples;
  std::vector<std::vector<BoundingBox>> predictions;
  std::string name;
  if (!o.baseline.empty()) {
    const auto b = baselines::parse_baseline(o.baseline);
    name = baselines::name_of(b);
    samples = load_data(o.dataset, part, o.config.tau, o.config.delta, std::nullopt);
    for (const auto& s : samples) predictions.push_back(baseline_prediction(b, s, s.delta()));
  } else {
    const Checkpoint c = load_checkpoint(o.checkpoint);
    const model::FvlModel model(c.config, c.params);
    name = "RNN-ED-" + model::name_of(c.config.variant);
    std::optional<Pooling> pooling;
    if (model::uses_flow(c.config.variant)) pooling = Pooling{o.pooling.expand, pool_size_of(c.config)};
    samples = load_data(o.dataset, part, c.config.tau, c.config.delta, pooling);
    const auto predicted = model.predict(samples);
    for (std::size_t i = 0; i < samples.size(); ++i) predictions.push_back(predicted[i].pixel_boxes(samples[i].image));
  }
  const auto report = evaluate_samples(name, samples, predictions);
  if (!o.out.empty()) metrics::write_report(o.out, report);
  out << metrics::format_table(report);
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const Part part = parse_part(o.split.empty() ? "test" : o.split);
  const Checkpoint c = load_checkpoint(o.checkpoint);
  const model::FvlModel model(c.config, c.params);
  std::optional<Pooling> pooling;
  if (model::uses_flow(c.config.variant)) pooling = Pooling{o.pooling.expand, pool_size_of(c.config)};
  std::vector<data::Sample> samples = load_data(o.dataset, part, c.config.tau, c.config.delta, pooling);
  if (!o.ids.empty()) {
    std::vector<data::Sample> chosen;
    for (std::size_t id : parse_ids(o.ids)) {
      const auto it = std::find_if(samples.begin(), samples.end(), [&](const data::Sample& s) { return s.id == id; });
      if (it == samples.end()) throw ValidationError("no sample with id " + std::to_string(id));
      chosen.push_back(*it);
    }
    samples = std::move(chosen);
  }
  const auto predicted = model.predict(samples);

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw FormatError("cannot write " + o.out);
  }
  std::ostream& sink = o.out.empty() ? out : file;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    json j;
    j["id"] = samples[i].id;
    j["video"] = samples[i].video;
    j["track"] = samples[i].track;
    j["start_frame"] = samples[i].start_frame;
    json boxes = json::array();
    for (const auto& b : predicted[i].pixel_boxes(samples[i].image)) boxes.push_back({b.cx, b.cy, b.w, b.h});
    j["boxes"] = boxes;
    sink << j.dump() << '\n';
  }
  return kOk;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  std::vector<model::Variant> variants;
  if (o.check_variant == "all") {
    variants = {model::Variant::x, model::Variant::xe, model::Variant::xo, model::Variant::xoe};
  } else {
    variants = {model::parse_variant(o.check_variant)};
  }
  bool ok = true;
  for (const auto v : variants) {
    model::ModelConfig config = o.check_config;
    config.variant = v;
    config.pooled_dim = 2 * o.pooling.n * o.pooling.n;
    const auto report = model::check_model_gradients(config, o.check_seed, o.batch, {o.step, o.tolerance});
    for (const auto& p : report.parameters) {
      out << "  " << model::name_of(v) << ' ' << p.name << "  max rel err " << p.max_rel_error << " over "
          << p.checked << (p.skipped ? " (" + std::to_string(p.skipped) + " skipped)" : std::string()) << '\n';
    }
    out << model::name_of(v) << ": max rel err " << report.max_rel_error << " over " << report.checked
        << " elements, " << (report.passed ? "PASS" : "FAIL") << '\n';
    ok = ok && report.passed;
  }
  return ok ? kOk : kNumeric;
}

void add_model_flags(CLI::App* sub, model::ModelConfig& c) {
  sub->add_option("--hidden", c.hidden, "Hidden size")->capture_default_str();
  sub->add_option("--embed", c.embed, "Embedding size")->capture_default_str();
}

void add_window_flags(CLI::App* sub, model::ModelConfig& c) {
  sub->add_option("--tau", c.tau, "Observed past steps")->capture_default_str();
  sub->add_option("--delta", c.delta, "Predicted future steps")->capture_default_str();
}

void add_pool_flags(CLI::App* sub, Options& o) {
  sub->add_option("--roi-expand", o.pooling.expand, "ROI expansion factor")->capture_default_str();
  sub->add_option("--pool-n", o.pooling.n, "Pooled grid size n (features 2 n^2)")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Future vehicle localization: data generation, training and evaluation", "fvl"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Render synthetic videos into a dataset directory");
  generate->add_option("--scenario", o.scenarios, "Scenario description file (repeatable)");
  generate->add_option("--suite", o.suite, "Built-in suite: turn-heavy");
  generate->add_option("--count", o.suite_options.count, "Suite: number of videos")->capture_default_str();
  generate->add_option("--frames", o.suite_options.frames, "Suite: frames per video")->capture_default_str();
  generate->add_option("--max-yaw-rate", o.suite_options.max_yaw_rate, "Suite: max ego yaw rate, rad/s")
      ->capture_default_str();
  generate->add_option("--box-noise", o.suite_options.box_noise, "Suite: box jitter std-dev, px")->capture_default_str();
  generate->add_option("--seed", o.seed, "Seed for the suite and the box noise")->capture_default_str();
  generate->add_option("--out", o.out, "Output directory")->required();
  generate->add_flag("--no-pool", o.no_pool, "Skip ROI pooling");
  add_window_flags(generate, o.config);
  add_pool_flags(generate, o);

  auto* pool = app.add_subcommand("pool", "Precompute pooled flow features of a dataset");
  pool->add_option("--dataset", o.dataset, "Video dataset directory")->required();
  pool->add_option("--out", o.out, "Write a pooled copy here instead of pooling in place");
  add_pool_flags(pool, o);

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint directory");
  train->add_option("--dataset", o.dataset, "Video dataset directory or samples file")->required();
  train->add_option("--out", o.out, "Checkpoint directory")->required();
  train->add_option("--variant", o.variant, "x, xe, xo or xoe")->capture_default_str();
  train->add_option("--split", o.split, "Videos to train on: train (default), test or all");
  train->add_option("--epochs", o.train.epochs, "Epochs")->capture_default_str();
  train->add_option("--batch", o.train.batch_size, "Batch size")->capture_default_str();
  train->add_option("--lr", o.train.learning_rate, "Adam learning rate")->capture_default_str();
  train->add_option("--seed", o.seed, "Seed for init, holdout and shuffling")->capture_default_str();
  train->add_option("--workers", o.train.workers, "Gradient threads; results do not depend on it")
      ->capture_default_str();
  train->add_option("--validation-fraction", o.train.validation_fraction, "Share held out for model selection")
      ->capture_default_str();
  add_model_flags(train, o.config);
  add_window_flags(train, o.config);
  add_pool_flags(train, o);

  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint or a baseline on a dataset");
  evaluate->add_option("--dataset", o.dataset, "Video dataset directory or samples file")->required();
  evaluate->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
  evaluate->add_option("--baseline", o.baseline, "linear or constaccel");
  evaluate->add_option("--split", o.split, "Videos to score: test (default), train or all");
  evaluate->add_option("--out", o.out, "JSON report file");
  add_window_flags(evaluate, o.config);
  evaluate->add_option("--roi-expand", o.pooling.expand, "ROI expansion factor")->capture_default_str();

  auto* predict = app.add_subcommand("predict", "Write predicted boxes as JSON lines");
  predict->add_option("--dataset", o.dataset, "Video dataset directory or samples file")->required();
  predict->add_option("--checkpoint", o.checkpoint, "Checkpoint directory")->required();
  predict->add_option("--split", o.split, "Videos to use: test (default), train or all");
  predict->add_option("--ids", o.ids, "Comma-separated sample ids (default all)");
  predict->add_option("--out", o.out, "Output file (default stdout)");
  predict->add_option("--roi-expand", o.pooling.expand, "ROI expansion factor")->capture_default_str();

  auto* gradcheck = app.add_subcommand("gradcheck", "Compare model gradients with finite differences");
  gradcheck->add_option("--variant", o.check_variant, "x, xe, xo, xoe or all")->capture_default_str();
  gradcheck->add_option("--seed", o.check_seed, "Parameter and data seed")->capture_default_str();
  gradcheck->add_option("--batch", o.batch, "Synthetic samples in the loss")->capture_default_str();
  gradcheck->add_option("--step", o.step, "Central difference step")->capture_default_str();
  gradcheck->add_option("--tolerance", o.tolerance, "Max relative error")->capture_default_str();
  gradcheck->add_option("--pool-n", o.pooling.n, "Pooled grid size n")->capture_default_str();
  add_model_flags(gradcheck, o.check_config);
  add_window_flags(gradcheck, o.check_config);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }


  try {
    if (generate->parsed()) return cmd_generate(o, out);
    if (pool->parsed()) return cmd_pool(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (evaluate->parsed()) return cmd_evaluate(o, out);
    if (predict->parsed()) return cmd_predict(o, out);
    if (gradcheck->parsed()) return cmd_gradcheck(o, out);
  } catch (const FormatError& e) {
    err << "fvl: " << e.what() << '\n';
    return kFormat;
  } catch (const NumericError& e) {
    err << "fvl: " << e.what() << '\n';
    return kNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "fvl: " << e.what() << '\n';
    return kFormat;
  } catch (const std::exception& e) {
    err << "fvl: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace fvl::cli
