#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "fcl/data.hpp"
#include "fcl/losses.hpp"
#include "fcl/metrics.hpp"

namespace fcl {

enum class Activation { relu, tanh };
enum class OptimizerKind { adam, sgd };

Activation parse_activation(std::string_view name);
OptimizerKind parse_optimizer(std::string_view name);
std::string_view to_string(Activation a);
std::string_view to_string(OptimizerKind o);

struct MLPConfig {
  std::vector<std::size_t> layers{2, 10, 10, 2};
  Activation activation = Activation::relu;
  std::uint64_t seed = 1;
  std::size_t epochs = 500;
  OptimizerKind optimizer = OptimizerKind::adam;
  double lr = 1e-3;
  double weight_decay = 0.0;

  void validate() const;
  friend bool operator==(const MLPConfig&, const MLPConfig&) = default;
};

/// Dense layer; weights are row-major (out x in).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct ModelState {
  MLPConfig config;
  std::vector<DenseLayer> layers;

  std::vector<double> logits(std::span<const double> x) const;
  ProbVector predict(std::span<const double> x) const;

  std::size_t num_parameters() const;
  /// Layer by layer: weights then bias.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
ModelState init_model(const MLPConfig& cfg);

struct DataSplit {
  std::vector<LabeledPoint> train;
  std::vector<LabeledPoint> val;
  std::vector<LabeledPoint> test;
};

/// Seeded shuffle, then 60% / 20% / 20%.
DataSplit split_dataset(std::vector<LabeledPoint> points, std::uint64_t seed);

struct LossGradient {
  double loss = 0.0;
  /// Same layout as ModelState::flatten().
  std::vector<double> grad;
};

/// Mean loss over `data` and its gradient by backpropagation. Weight decay
/// is not included.
LossGradient batch_loss_gradient(const ModelState& model, const LossSpec& spec,
                                 std::span<const LabeledPoint> data);

/// Mean loss only.
double batch_loss(const ModelState& model, const LossSpec& spec, std::span<const LabeledPoint> data);

/// Model outputs as a prediction set (logits kept, posteriors copied over).
PredictionSet predict_set(const ModelState& model, std::span<const LabeledPoint> data);

struct EpochRecord {
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_ece = 0.0;
  double test_nll = 0.0;
  double test_error = 0.0;
};

struct TrainResult {
  ModelState model;
  std::vector<EpochRecord> history;
};

/// Full-batch training. Each epoch records losses and test metrics at the
/// current parameters and then takes one optimizer step. Throws
/// ConvergenceError naming the epoch if the loss stops being finite.
TrainResult train(const MLPConfig& cfg, const LossSpec& spec, std::span<const LabeledPoint> train_data,
                  std::span<const LabeledPoint> test_data);

/// CSV `epoch,train_loss,test_loss,test_ece,test_nll,test_error`.
void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

struct Bounds {
  double x0_min = -1.5;
  double x0_max = 2.5;
  double x1_min = -1.0;
  double x1_max = 1.5;
};

struct DecisionGrid {
  std::size_t resolution = 0;
  std::vector<std::array<double, 2>> points;
  std::vector<ProbVector> probs;
};

/// resolution x resolution grid over `bounds`, row-major with x1 as the row.
DecisionGrid decision_grid(const ModelState& model, const Bounds& bounds, std::size_t resolution);

/// Share of grid cells whose top probability exceeds `threshold`.
double confident_fraction(const DecisionGrid& grid, double threshold = 0.99);

/// CSV `x0,x1,p_0,...,p_{K-1}`.
void write_grid_csv(std::ostream& out, const DecisionGrid& grid);

struct SweepRow {
  double gamma = 0.0;
  double lambda = 0.0;
  double best_t = 1.0;
  double pre_ece = 0.0;
  double post_ece = 0.0;
  double pre_adaece = 0.0;
  double post_adaece = 0.0;
  double pre_cwece = 0.0;
  double post_cwece = 0.0;
  double nll = 0.0;
  double error = 0.0;
};

/// Trains one FCL model per (gamma, lambda) on split.train, picks a
/// temperature on split.val and reports test-set metrics before and after it.
/// lambda = 0 rows are plain focal loss. nll and error are those of the
/// unscaled model.
std::vector<SweepRow> lambda_sweep(const MLPConfig& cfg, std::span<const double> gammas,
                                   std::span<const double> lambdas, const DataSplit& split,
                                   std::size_t bins = kDefaultBins);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace fcl
