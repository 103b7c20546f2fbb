#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include "gnnfuse/cli.hpp"
#include "gnnfuse/ensemble.hpp"
#include "gnnfuse/errors.hpp"
#include "gnnfuse/gnn.hpp"
#include "gnnfuse/gradcheck.hpp"
#include "gnnfuse/graph.hpp"
#include "gnnfuse/io.hpp"
#include "gnnfuse/metrics.hpp"
#include "gnnfuse/random.hpp"
#include "gnnfuse/synth.hpp"
#include "gnnfuse/training.hpp"

namespace gnnfuse::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kGradTolerance = 1e-4;

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

// Reads labels and reorders them to match the prediction rows.
LabelMatrix labels_for(const PredictionTensor& preds, const fs::path& path, std::string_view role) {
  LabelMatrix labels = load_labels(path);
  require_same_classes(preds.class_names(), std::string(role) + " predictions", labels.class_names(),
                       std::string(role) + " labels");
  return align_labels(labels, preds.sample_ids());
}

// ---- build-graph ---------------------------------------------------------

struct BuildGraphArgs {
  std::string labels, out;
  std::size_t k = 0;
};

int build_graph_cmd(const BuildGraphArgs& a, std::ostream& out) {
  Stopwatch clock;
  RunManifest m;
  m.command = "build-graph";
  const LabelMatrix labels = load_labels(a.labels);
  m.timings["load"] = clock.lap();
  const ComorbidityGraph graph = build_graph(labels, a.k);
  m.timings["build"] = clock.lap();
  ensure_parent(a.out);
  export_graph(graph, a.out);
  m.config = {{"k", a.k}};
  m.inputs["labels"] = io::file_hash(a.labels);
  m.outputs["graph"] = a.out;
  m.timings["write"] = clock.lap();
  write_manifest(m, manifest_path(a.out));
  out << "graph: " << graph.size() << " classes, k=" << graph.k() << " -> " << a.out << "\n";
  return kOk;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string train_preds, train_labels, val_preds, val_labels, graph, config, out, history;
  std::string preset;
  std::optional<std::size_t> layers, d1, epochs;
  std::optional<std::uint64_t> seed;
};

int train_cmd(const TrainArgs& a, std::ostream& out) {
  Stopwatch clock;
  RunManifest m;
  m.command = "train";
  if (a.val_preds.empty() != a.val_labels.empty()) {
    throw ValidationError("train: --val-preds and --val-labels go together");
  }
  TrainConfig config = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
  if (a.epochs) config.epochs = *a.epochs;
  if (a.seed) config.seed = *a.seed;

  std::size_t layers = 3, d1 = 16;
  if (!a.preset.empty()) {
    const ArchitecturePreset& p = architecture_preset(a.preset);
    layers = p.layers;
    d1 = p.first_width;
  }
  if (a.layers) layers = *a.layers;
  if (a.d1) d1 = *a.d1;

  const ComorbidityGraph graph = import_graph(a.graph);
  const PredictionTensor train_preds = load_predictions(a.train_preds);
  require_same_classes(graph.classes(), "graph", train_preds.class_names(), "train predictions");
  const LabelMatrix train_labels = labels_for(train_preds, a.train_labels, "train");
  std::optional<PredictionTensor> val_preds;
  std::optional<LabelMatrix> val_labels;
  if (!a.val_preds.empty()) {
    val_preds = load_predictions(a.val_preds);
    require_same_classes(graph.classes(), "graph", val_preds->class_names(), "validation predictions");
    if (val_preds->models() != train_preds.models()) {
      throw ValidationError("train: validation has " + std::to_string(val_preds->models()) +
                            " models, training has " + std::to_string(train_preds.models()));
    }
    val_labels = labels_for(*val_preds, a.val_labels, "validation");
  }
  m.timings["load"] = clock.lap();

  const DimensionSchedule schedule = DimensionSchedule::make(train_preds.models(), d1, layers);
  GnnModel init = init_model(schedule, graph, config.seed);
  Dataset validation;
  if (val_preds) validation = {&*val_preds, &*val_labels};
  TrainResult result = train_gnn(std::move(init), {&train_preds, &train_labels}, validation, config);
  m.timings["train"] = clock.lap();

  ensure_parent(a.out);
  save_model(result.model, a.out);
  const fs::path history = a.history.empty() ? fs::path(a.out).parent_path() / "history.csv"
                                             : fs::path(a.history);
  ensure_parent(history);
  io::write_text(history, history_csv(result.history));
  m.outputs["model"] = a.out;
  m.outputs["history"] = history.string();

  if (config.snapshot && !result.snapshots.empty()) {
    std::vector<SnapshotRecord> records;
    for (const Snapshot& s : result.snapshots) records.push_back(s.record);
    for (const SnapshotRecord& best : select_top_q(records, config.snapshot->q)) {
      GnnModel snap = result.model;
      restore_parameters(snap, result.snapshots[best.cycle - 1].parameters);
      fs::path path = a.out;
      path.replace_extension("");
      path += "." + best.checkpoint + ".json";
      save_model(snap, path);
      m.outputs["snapshot_" + best.checkpoint] = path.string();
    }
  }
  m.timings["write"] = clock.lap();

  m.config = train_config_to_json(config);
  m.config["schedule"] = schedule.dims();
  if (!a.preset.empty()) m.config["preset"] = a.preset;
  m.seed = config.seed;
  m.inputs["graph"] = io::file_hash(a.graph);
  m.inputs["train_predictions"] = io::file_hash(a.train_preds);
  m.inputs["train_labels"] = io::file_hash(a.train_labels);
  if (val_preds) {
    m.inputs["validation_predictions"] = io::file_hash(a.val_preds);
    m.inputs["validation_labels"] = io::file_hash(a.val_labels);
  }
  if (!a.config.empty()) m.inputs["config"] = io::file_hash(a.config);
  write_manifest(m, manifest_path(a.out));

  for (const EpochRecord& r : result.history) {
    out << "epoch " << r.epoch << "  loss " << io::format_double(r.train_loss);
    if (!std::isnan(r.val_macro_auc)) out << "  val macro AUC " << io::format_double(r.val_macro_auc);
    out << "\n";
  }
  out << "model -> " << a.out << "\n";
  return kOk;
}

// ---- predict / baseline --------------------------------------------------

int predict_cmd(const std::string& model_path, const std::string& preds_path, const std::string& out_path,
                std::ostream& out) {
  Stopwatch clock;
  RunManifest m;
  m.command = "predict";
  const GnnModel model = load_model(model_path);
  const PredictionTensor preds = load_predictions(preds_path);
  m.timings["load"] = clock.lap();
  const ScoreMatrix fused = fuse(model, preds);
  m.timings["fuse"] = clock.lap();
  ensure_parent(out_path);
  save_scores(fused, out_path);
  m.inputs["model"] = io::file_hash(model_path);
  m.inputs["predictions"] = io::file_hash(preds_path);
  m.outputs["scores"] = out_path;
  m.timings["write"] = clock.lap();
  write_manifest(m, manifest_path(out_path));
  out << "fused " << fused.sample_ids.size() << " samples -> " << out_path << "\n";
  return kOk;
}

int baseline_cmd(const std::string& preds_path, const std::string& out_path, std::ostream& out) {
  Stopwatch clock;
  RunManifest m;
  m.command = "baseline";
  const PredictionTensor preds = load_predictions(preds_path);
  m.timings["load"] = clock.lap();
  const ScoreMatrix avg = average_ensemble(preds);
  m.timings["average"] = clock.lap();
  ensure_parent(out_path);
  save_scores(avg, out_path);
  m.inputs["predictions"] = io::file_hash(preds_path);
  m.outputs["scores"] = out_path;
  m.timings["write"] = clock.lap();
  write_manifest(m, manifest_path(out_path));
  out << "averaged " << preds.models() << " models over " << avg.sample_ids.size() << " samples -> "
      << out_path << "\n";
  return kOk;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string scores, labels, out, csv;
  bool no_roc = false;
};

int evaluate_cmd(const EvaluateArgs& a, std::ostream& out) {
  Stopwatch clock;
  RunManifest m;
  m.command = "evaluate";
  const ScoreMatrix scores = load_scores(a.scores);
  const LabelMatrix labels = load_labels(a.labels);
  m.timings["load"] = clock.lap();
  const EvalReport report = evaluate(scores, labels);
  m.timings["evaluate"] = clock.lap();
  out << report_table(report);
  if (!report.skipped.empty()) {
    out << "skipped (single-class):";
    for (const auto& name : report.skipped) out << ' ' << name;
    out << "\n";
  }
  m.inputs["scores"] = io::file_hash(a.scores);
  m.inputs["labels"] = io::file_hash(a.labels);
  m.config = {{"include_roc", !a.no_roc}};
  if (!a.out.empty()) {
    ensure_parent(a.out);
    io::write_text(a.out, report_to_json(report, !a.no_roc).dump(2) + "\n");
    m.outputs["report"] = a.out;
  }
  if (!a.csv.empty()) {
    ensure_parent(a.csv);
    io::write_text(a.csv, report_csv(report));
    m.outputs["csv"] = a.csv;
  }
  m.timings["write"] = clock.lap();
  if (!a.out.empty()) write_manifest(m, manifest_path(a.out));
  else if (!a.csv.empty()) write_manifest(m, manifest_path(a.csv));
  return kOk;
}

// ---- gradcheck -----------------------------------------------------------

struct GradcheckArgs {
  std::size_t c = 5, l = 3, n = 6, k = 2, d1 = 8, batch = 4;
  std::uint64_t seed = 0;
  double step = 1e-5;
  bool fault = false;
};

int gradcheck_cmd(const GradcheckArgs& a, std::ostream& out) {
  Stopwatch clock;
  const GradCheckResult r = gradient_check_instance(
      {a.c, a.l, a.n, a.k, a.d1, a.batch, a.seed, a.step, a.fault});
  const double seconds = clock.lap();
  out << "gradcheck C=" << a.c << " L=" << a.l << " N=" << a.n << " K=" << a.k << " d1=" << a.d1
      << " seed=" << a.seed << (a.fault ? " [fault injected]" : "") << "\n"
      << "probes " << r.probes << ", skipped at kinks " << r.skipped << "\n"
      << "max relative error " << io::format_double(r.max_relative_error) << " at "
      << r.worst_parameter << "[" << r.worst_index << "] (analytic "
      << io::format_double(r.worst_analytic) << ", numeric " << io::format_double(r.worst_numeric)
      << ")\n"
      << "time " << seconds << " s\n";
  if (!(r.max_relative_error <= kGradTolerance)) {
    out << "FAIL: above tolerance " << kGradTolerance << "\n";
    return kNumerical;
  }
  out << "OK\n";
  return kOk;
}

// ---- synth ---------------------------------------------------------------

int synth_cmd(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  Stopwatch clock;
  RunManifest m;
  m.command = "synth";
  SynthConfig config = config_path.empty()
                           ? benchmark_config()
                           : synth_config_from_json(nlohmann::json::parse(io::read_text(config_path)));
  if (seed) config.seed = *seed;
  const SynthDataset data = generate_dataset(config);
  for (const auto& w : data.warnings) err << "warning: " << w << "\n";
  m.timings["generate"] = clock.lap();

  const fs::path dir = out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  save_predictions(data.train_predictions, dir / "train_predictions.csv");
  save_labels(data.train_labels, dir / "train_labels.csv");
  save_predictions(data.test_predictions, dir / "test_predictions.csv");
  save_labels(data.test_labels, dir / "test_labels.csv");
  io::write_text(dir / "config.json", synth_config_to_json(config).dump(2) + "\n");
  m.timings["write"] = clock.lap();

  m.config = synth_config_to_json(config);
  m.seed = config.seed;
  if (!config_path.empty()) m.inputs["config"] = io::file_hash(config_path);
  for (const char* name : {"train_predictions.csv", "train_labels.csv", "test_predictions.csv",
                           "test_labels.csv", "config.json"}) {
    m.outputs[name] = (dir / name).string();
  }
  write_manifest(m, dir / "manifest.json");
  out << "synth: " << config.classes << " classes, " << config.models << " models, "
      << config.samples << " train / " << config.test_samples << " test -> " << dir.string() << "\n";
  return kOk;
}

}  // namespace

GradCheckResult gradient_check_instance(const GradCheckInstance& instance) {
  if (instance.classes < 2 || instance.layers < 1 || instance.inputs < 1 || instance.batch < 1) {
    throw ValidationError("gradcheck: classes >= 2, layers, inputs and batch >= 1 required");
  }
  Rng rng(instance.seed, 0x6763);

  // Chained labels so neighbouring classes agree and kappa is far from zero.
  const std::size_t rows = 200;
  std::vector<std::string> classes, ids;
  for (std::size_t c = 0; c < instance.classes; ++c) classes.push_back("c" + std::to_string(c));
  std::vector<std::uint8_t> values(rows * instance.classes);
  for (std::size_t s = 0; s < rows; ++s) {
    ids.push_back("r" + std::to_string(s));
    for (std::size_t c = 0; c < instance.classes; ++c) {
      const bool copy = c > 0 && rng.uniform() < 0.5;
      const bool flip = copy && c % 3 == 2;
      std::uint8_t v = copy ? values[s * instance.classes + c - 1] : (rng.uniform() < 0.35 ? 1 : 0);
      if (flip) v = 1 - v;
      values[s * instance.classes + c] = v;
    }
  }
  const ComorbidityGraph graph =
      build_graph(LabelMatrix(classes, ids, std::move(values)), instance.k);

  GnnModel model =
      init_model(DimensionSchedule::make(instance.inputs, instance.first_width, instance.layers), graph, instance.seed);
  for (GnnLayer& layer : model.layers()) {
    for (double& b : layer.bias.value.values()) b = rng.uniform(-0.2, 0.2);
    for (double& b : layer.edge_mlp.b1.value.values()) b = rng.uniform(-0.2, 0.2);
    for (double& b : layer.edge_mlp.b2.value.values()) b = rng.uniform(-0.2, 0.2);
  }

  std::vector<VertexFeatures> batch;
  for (std::size_t b = 0; b < instance.batch; ++b) {
    Matrix f(instance.classes, instance.inputs);
    for (double& v : f.values()) v = rng.uniform();
    batch.push_back({std::move(f)});
  }
  Matrix targets(instance.classes, instance.batch);
  for (double& v : targets.values()) v = rng.uniform() < 0.4 ? 1.0 : 0.0;

  const ScalarFunction loss = [&](Tape& tape) {
    return tape.bce(forward(tape, model, batch), targets);
  };
  const std::vector<Parameter*> params = model.parameters();
  return finite_difference_check(loss, params, instance.step, instance.fault_injection);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Comorbidity-aware decision fusion for multi-label classifier ensembles", "gnnfuse"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::function<int()> action;

  BuildGraphArgs bg;
  auto* cmd_bg = app.add_subcommand("build-graph", "Build the kappa co-occurrence graph from training labels");
  cmd_bg->add_option("--labels", bg.labels, "Label CSV (sample_id,<classes>; -1 is read as 0)")->required();
  cmd_bg->add_option("--k", bg.k, "In-neighbours kept per class (1..C-1)")->required();
  cmd_bg->add_option("--out", bg.out, "Output graph JSON")->required();
  cmd_bg->callback([&] { action = [&] { return build_graph_cmd(bg, out); }; });

  TrainArgs tr;
  auto* cmd_tr = app.add_subcommand("train", "Train the fusion GNN on ensemble predictions");
  cmd_tr->add_option("--train-preds", tr.train_preds, "Training prediction CSV")->required();
  cmd_tr->add_option("--train-labels", tr.train_labels, "Training label CSV")->required();
  cmd_tr->add_option("--val-preds", tr.val_preds, "Validation prediction CSV");
  cmd_tr->add_option("--val-labels", tr.val_labels, "Validation label CSV");
  cmd_tr->add_option("--graph", tr.graph, "Graph JSON from build-graph")->required();
  cmd_tr->add_option("--config", tr.config, "Training config JSON (lr, weight_decay, batch_size, epochs, seed, snapshot)");
  cmd_tr->add_option("--out", tr.out, "Output model JSON")->required();
  cmd_tr->add_option("--history", tr.history, "Per-epoch history CSV (default: history.csv beside the model)");
  cmd_tr->add_option("--preset", tr.preset, "Architecture preset: resnet18, densenet121 or xception");
  cmd_tr->add_option("--layers", tr.layers, "Number of message-passing layers (default 3)")->check(CLI::PositiveNumber);
  cmd_tr->add_option("--d1", tr.d1, "Width of the first hidden layer (default 16)")->check(CLI::PositiveNumber);
  cmd_tr->add_option("--epochs", tr.epochs, "Override the config's epoch count");
  cmd_tr->add_option("--seed", tr.seed, "Override the config's seed");
  cmd_tr->callback([&] { action = [&] { return train_cmd(tr, out); }; });

  std::string pr_model, pr_preds, pr_out;
  auto* cmd_pr = app.add_subcommand("predict", "Fuse ensemble predictions with a trained model");
  cmd_pr->add_option("--model", pr_model, "Model JSON from train")->required();
  cmd_pr->add_option("--preds", pr_preds, "Prediction CSV")->required();
  cmd_pr->add_option("--out", pr_out, "Output score CSV (sample_id,<classes>)")->required();
  cmd_pr->callback([&] { action = [&] { return predict_cmd(pr_model, pr_preds, pr_out, out); }; });

  std::string bl_preds, bl_out;
  auto* cmd_bl = app.add_subcommand("baseline", "Average ensemble predictions over models");
  cmd_bl->add_option("--preds", bl_preds, "Prediction CSV")->required();
  cmd_bl->add_option("--out", bl_out, "Output score CSV")->required();
  cmd_bl->callback([&] { action = [&] { return baseline_cmd(bl_preds, bl_out, out); }; });

  EvaluateArgs ev;
  auto* cmd_ev = app.add_subcommand("evaluate", "Per-class AUC and Youden operating points");
  cmd_ev->add_option("--scores", ev.scores, "Score CSV from predict or baseline")->required();
  cmd_ev->add_option("--labels", ev.labels, "Label CSV")->required();
  cmd_ev->add_option("--out", ev.out, "Report JSON");
  cmd_ev->add_option("--csv", ev.csv, "Per-class CSV summary");
  cmd_ev->add_flag("--no-roc", ev.no_roc, "Leave ROC point lists out of the JSON report");
  cmd_ev->callback([&] { action = [&] { return evaluate_cmd(ev, out); }; });

  GradcheckArgs gc;
  auto* cmd_gc = app.add_subcommand("gradcheck", "Compare tape gradients with central differences");
  cmd_gc->add_option("--c", gc.c, "Classes (graph vertices)")->capture_default_str();
  cmd_gc->add_option("--l", gc.l, "Layers")->capture_default_str();
  cmd_gc->add_option("--n", gc.n, "Ensemble size (input width)")->capture_default_str();
  cmd_gc->add_option("--k", gc.k, "In-neighbours per vertex")->capture_default_str();
  cmd_gc->add_option("--d1", gc.d1, "First hidden width")->capture_default_str();
  cmd_gc->add_option("--batch", gc.batch, "Samples in the loss")->capture_default_str();
  cmd_gc->add_option("--step", gc.step, "Finite-difference step")->capture_default_str();
  cmd_gc->add_option("--seed", gc.seed, "Instance seed")->capture_default_str();
  cmd_gc->add_flag("--fault-inject", gc.fault, "Corrupt the tanh derivative (negative control)")
      ->group("");
  cmd_gc->callback([&] { action = [&] { return gradcheck_cmd(gc, out); }; });

  std::string sy_config, sy_dir;
  std::optional<std::uint64_t> sy_seed;
  auto* cmd_sy = app.add_subcommand("synth", "Generate a synthetic comorbid dataset and simulated ensemble");
  cmd_sy->add_option("--config", sy_config, "Synth config JSON (default: the 8-class benchmark)");
  cmd_sy->add_option("--out-dir", sy_dir, "Directory for the four CSVs, config echo and manifest")->required();
  cmd_sy->add_option("--seed", sy_seed, "Override the config's seed");
  cmd_sy->callback([&] { action = [&] { return synth_cmd(sy_config, sy_dir, sy_seed, out, err); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (const CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'gnnfuse " << sub->get_name() << " --help' for usage\n";
    } else {
      err << "run 'gnnfuse --help' for usage\n";
    }
    return kValidation;
  }

  try {
    return action ? action() : kValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace gnnfuse::cli
