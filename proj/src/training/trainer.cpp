#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/io.hpp"
#include "gnnfuse/metrics.hpp"
#include "gnnfuse/random.hpp"
#include "gnnfuse/training.hpp"

namespace gnnfuse {

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

void check_dataset(const GnnModel& model, const Dataset& d, const char* name) {
  require_same_classes(model.graph().classes(), "graph", d.predictions->class_names(),
                       std::string(name) + " predictions");
  require_same_classes(model.graph().classes(), "graph", d.labels->class_names(),
                       std::string(name) + " labels");
  if (d.predictions->sample_ids() != d.labels->sample_ids()) {
    throw ValidationError(std::string(name) + " predictions and labels list different samples");
  }
  if (d.predictions->models() != model.schedule().input_width()) {
    throw ValidationError(std::string(name) + " predictions have " +
                          std::to_string(d.predictions->models()) + " models, schedule expects d_0=" +
                          std::to_string(model.schedule().input_width()));
  }
}

double validation_auc(const GnnModel& model, const Dataset& validation) {
  if (validation.predictions == nullptr) return std::numeric_limits<double>::quiet_NaN();
  return evaluate(fuse(model, *validation.predictions), *validation.labels).macro_auc;
}

std::vector<Matrix> copy_parameters(const GnnModel& model) {
  std::vector<Matrix> out;
  for (const Parameter* p : model.parameters()) out.push_back(p->value);
  return out;
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ValidationError("training config must be a JSON object");
    reject_unknown_keys(j, {"lr", "weight_decay", "batch_size", "epochs", "seed", "snapshot"},
                        "training config");
    TrainConfig c;
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    if (j.contains("snapshot") && !j.at("snapshot").is_null()) {
      const auto& s = j.at("snapshot");
      reject_unknown_keys(s, {"lr_max", "cycles", "updates_per_cycle", "q"}, "snapshot config");
      SnapshotConfig sc;
      sc.schedule.lr_max = s.at("lr_max").get<double>();
      sc.schedule.cycles = s.at("cycles").get<std::size_t>();
      sc.schedule.updates_per_cycle = s.at("updates_per_cycle").get<std::size_t>();
      sc.q = s.value("q", sc.q);
      if (sc.schedule.cycles == 0 || sc.schedule.updates_per_cycle == 0) {
        throw ValidationError("snapshot config: cycles and updates_per_cycle must be positive");
      }
      if (sc.q == 0 || sc.q > sc.schedule.cycles) {
        throw ValidationError("snapshot config: q must lie in [1, cycles]");
      }
      if (!(sc.schedule.lr_max > 0.0)) throw ValidationError("snapshot config: lr_max must be positive");
      c.snapshot = sc;
    }
    if (!(c.lr >= 0.0) || !(c.weight_decay >= 0.0)) {
      throw ValidationError("training config: lr and weight_decay must be non-negative");
    }
    if (c.batch_size == 0) throw ValidationError("training config: batch_size must be positive");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("training config: ") + e.what());
  }
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  nlohmann::json j{{"lr", c.lr},
                   {"weight_decay", c.weight_decay},
                   {"batch_size", c.batch_size},
                   {"epochs", c.epochs},
                   {"seed", c.seed}};
  if (c.snapshot) {
    j["snapshot"] = {{"lr_max", c.snapshot->schedule.lr_max},
                     {"cycles", c.snapshot->schedule.cycles},
                     {"updates_per_cycle", c.snapshot->schedule.updates_per_cycle},
                     {"q", c.snapshot->q}};
  }
  return j;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  try {
    return train_config_from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void restore_parameters(GnnModel& model, std::span<const Matrix> values) {
  auto params = model.parameters();
  if (params.size() != values.size()) throw ShapeError("restore_parameters: count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->value.same_shape(values[i])) throw ShapeError("restore_parameters: shape mismatch");
    params[i]->value = values[i];
  }
}

TrainResult train_gnn(GnnModel model, Dataset train, Dataset validation, const TrainConfig& config) {
  if (train.predictions == nullptr || train.labels == nullptr) {
    throw ValidationError("train_gnn: no training data");
  }
  if (train.predictions->samples() == 0) throw ValidationError("train_gnn: empty training set");
  if (config.batch_size == 0) throw ValidationError("train_gnn: batch_size must be positive");
  check_dataset(model, train, "training");
  if ((validation.predictions == nullptr) != (validation.labels == nullptr)) {
    throw ValidationError("train_gnn: validation needs both predictions and labels");
  }
  if (validation.predictions != nullptr) check_dataset(model, validation, "validation");

  const PredictionTensor& preds = *train.predictions;
  const LabelMatrix& labels = *train.labels;
  const std::size_t samples = preds.samples();
  const std::size_t classes = preds.classes();

  std::vector<VertexFeatures> features;
  features.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) features.push_back(assemble_features(preds, s));

  std::vector<Parameter*> params = model.parameters();
  AdamState adam = make_adam(params, config.lr, config.weight_decay);
  Rng rng(config.seed, 0x7472);

  TrainResult result{model, {}, {}};
  std::size_t total_updates = 0;
  if (config.snapshot) {
    total_updates = config.snapshot->schedule.cycles * config.snapshot->schedule.updates_per_cycle;
  }
  const bool by_epochs = !config.snapshot.has_value();
  if (by_epochs && config.epochs == 0) return result;

  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), 0);
  std::vector<VertexFeatures> batch;
  std::size_t global_update = 0;
  bool done = false;
  for (std::size_t epoch = 1; !done; ++epoch) {
    for (std::size_t i = samples; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0, batch_id = 0; start < samples; start += config.batch_size, ++batch_id) {
      const std::size_t end = std::min(samples, start + config.batch_size);
      batch.clear();
      Matrix targets(classes, end - start);
      for (std::size_t b = start; b < end; ++b) {
        batch.push_back(features[order[b]]);
        for (std::size_t c = 0; c < classes; ++c) targets(c, b - start) = labels.at(order[b], c);
      }

      Tape tape;
      Var loss = tape.bce(forward(tape, model, batch), targets);
      const double value = tape.value(loss)[0];
      if (!std::isfinite(value)) {
        throw NumericalError("train_gnn: non-finite loss in epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_id));
      }
      tape.backward(loss);
      if (config.snapshot) adam.lr = cosine_lr(config.snapshot->schedule, global_update);
      adam_step(adam, params);
      ++global_update;
      loss_sum += value * static_cast<double>(end - start);
      seen += end - start;

      if (config.snapshot && global_update % config.snapshot->schedule.updates_per_cycle == 0) {
        const std::size_t cycle = global_update / config.snapshot->schedule.updates_per_cycle;
        Snapshot snap;
        snap.record = {"cycle" + std::to_string(cycle), cycle, validation_auc(model, validation)};
        snap.parameters = copy_parameters(model);
        result.snapshots.push_back(std::move(snap));
      }
      if (!by_epochs && global_update >= total_updates) {
        done = true;
        break;
      }
    }
    result.history.push_back({epoch, loss_sum / static_cast<double>(seen), validation_auc(model, validation)});
    if (by_epochs && epoch >= config.epochs) done = true;
  }
  result.model = std::move(model);
  return result;
}

std::string history_csv(std::span<const EpochRecord> history) {
  std::ostringstream out;
  out << "epoch,train_loss,val_macro_auc\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << io::format_double(r.train_loss) << ','
        << (std::isnan(r.val_macro_auc) ? std::string("nan") : io::format_double(r.val_macro_auc))
        << '\n';
  }
  return out.str();
}

}  // namespace gnnfuse
