#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnnfuse/ensemble.hpp"
#include "gnnfuse/gnn.hpp"
#include "gnnfuse/graph.hpp"
#include "gnnfuse/tape.hpp"
#include "json.hpp"

namespace gnnfuse {

// Mean binary cross-entropy, predictions clamped to [1e-7, 1 - 1e-7].
double bce(std::span<const double> predictions, std::span<const double> targets);

struct AdamState {
  double lr = 1e-4;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

AdamState make_adam(std::span<Parameter* const> params, double lr, double weight_decay);

// Bias-corrected Adam on each parameter's `grad`, preceded by decoupled
// weight decay theta *= (1 - lr * weight_decay). Throws NumericalError on a
// non-finite gradient before touching any parameter.
void adam_step(AdamState& state, std::span<Parameter* const> params);

// Cosine annealing with warm restarts.
struct SnapshotSchedule {
  double lr_max = 1e-4;
  std::size_t cycles = 1;
  std::size_t updates_per_cycle = 1;
};

// (lr_max / 2) * (1 + cos(pi * t / updates_per_cycle)),
// t = global_update mod updates_per_cycle.
double cosine_lr(const SnapshotSchedule& schedule, std::size_t global_update);

struct SnapshotRecord {
  std::string checkpoint;
  std::size_t cycle = 0;
  double metric = 0.0;
};

// The q records with the highest metric, best first; equal metrics keep the
// earlier cycle.
std::vector<SnapshotRecord> select_top_q(std::span<const SnapshotRecord> records, std::size_t q);

struct SnapshotConfig {
  SnapshotSchedule schedule;
  std::size_t q = 1;
};

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 1e-5;
  std::size_t batch_size = 8;
  std::size_t epochs = 8;
  std::uint64_t seed = 0;
  // When set, the learning rate follows the cosine schedule, training runs
  // for cycles * updates_per_cycle updates and a snapshot is kept at the end
  // of every cycle.
  std::optional<SnapshotConfig> snapshot;
};

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig load_train_config(const std::filesystem::path& path);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_macro_auc = 0.0;  // NaN without validation data
};

struct Snapshot {
  SnapshotRecord record;
  std::vector<Matrix> parameters;
};

struct TrainResult {
  GnnModel model;
  std::vector<EpochRecord> history;
  std::vector<Snapshot> snapshots;
};

struct Dataset {
  const PredictionTensor* predictions = nullptr;
  const LabelMatrix* labels = nullptr;  // same samples, same order
};

// Mini-batch training of `model` with mean BCE and Adam. All randomness
// comes from config.seed. `validation` may be empty.
TrainResult train_gnn(GnnModel model, Dataset train, Dataset validation, const TrainConfig& config);

// Copies saved parameter values into `model`.
void restore_parameters(GnnModel& model, std::span<const Matrix> values);

// epoch,train_loss,val_macro_auc
std::string history_csv(std::span<const EpochRecord> history);

}  // namespace gnnfuse
