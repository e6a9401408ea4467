#include "fcl/train.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "fcl/calibrate.hpp"
#include "fcl/error.hpp"
#include "fcl/io.hpp"
#include "fcl/rng.hpp"

namespace fcl {

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ValidationError(fmt::format("unknown activation '{}'", name));
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw ValidationError(fmt::format("unknown optimizer '{}'", name));
}

std::string_view to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

std::string_view to_string(OptimizerKind o) {
  return o == OptimizerKind::adam ? "adam" : "sgd";
}

void MLPConfig::validate() const {
  if (layers.size() < 2) throw ValidationError("an MLP needs at least input and output widths");
  if (layers.front() != 2) throw ValidationError("the first layer width must be the input dimension 2");
  if (layers.back() < 2) throw ValidationError("the last layer width must be the class count (>= 2)");
  for (auto w : layers) {
    if (w == 0) throw ValidationError("layer widths must be >= 1");
  }
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be > 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ValidationError("weight decay must be >= 0");
}

namespace {

double activate(Activation a, double z) {
  return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative expressed through the activation output h.
double activate_grad(Activation a, double z, double h) {
  return a == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - h * h;
}

struct Trace {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activations of each layer
};

std::vector<double> forward(const ModelState& model, std::span<const double> x, Trace* trace) {
  std::vector<double> h(x.begin(), x.end());
  const std::size_t depth = model.layers.size();
  for (std::size_t l = 0; l < depth; ++l) {
    const DenseLayer& layer = model.layers[l];
    std::vector<double> z(layer.bias);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = &layer.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) z[o] += row[i] * h[i];
    }
    if (trace) {
      trace->inputs.push_back(h);
      trace->pre.push_back(z);
    }
    if (l + 1 < depth) {
      for (auto& v : z) v = activate(model.config.activation, v);
    }
    h = std::move(z);
  }
  return h;
}

void check_label(const ModelState& model, const LabeledPoint& p) {
  const std::size_t k = model.config.layers.back();
  if (p.label < 0 || static_cast<std::size_t>(p.label) >= k) {
    throw ValidationError(fmt::format("label {} outside [0, {})", p.label, k));
  }
}

}  // namespace

std::vector<double> ModelState::logits(std::span<const double> x) const {
  if (layers.empty() || x.size() != layers.front().in) {
    throw ValidationError(fmt::format("input has {} features, model expects {}", x.size(),
                                      layers.empty() ? 0 : layers.front().in));
  }
  return forward(*this, x, nullptr);
}

ProbVector ModelState::predict(std::span<const double> x) const {
  const auto z = logits(x);
  return ProbVector::from_logits(z);
}

std::size_t ModelState::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> ModelState::flatten() const {
  std::vector<double> out;
  out.reserve(num_parameters());
  for (const auto& l : layers) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void ModelState::unflatten(std::span<const double> params) {
  if (params.size() != num_parameters()) {
    throw ValidationError(fmt::format("expected {} parameters, got {}", num_parameters(), params.size()));
  }
  std::size_t pos = 0;
  for (auto& l : layers) {
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos), l.weights.size(), l.weights.begin());
    pos += l.weights.size();
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos), l.bias.size(), l.bias.begin());
    pos += l.bias.size();
  }
}

ModelState init_model(const MLPConfig& cfg) {
  cfg.validate();
  ModelState model;
  model.config = cfg;
  Rng rng(cfg.seed);
  for (std::size_t l = 0; l + 1 < cfg.layers.size(); ++l) {
    DenseLayer layer;
    layer.in = cfg.layers[l];
    layer.out = cfg.layers[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    layer.weights.resize(layer.in * layer.out);
    layer.bias.resize(layer.out);
    for (auto& w : layer.weights) w = rng.uniform(-bound, bound);
    for (auto& b : layer.bias) b = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

DataSplit split_dataset(std::vector<LabeledPoint> points, std::uint64_t seed) {
  const std::size_t n = points.size();
  const std::size_t n_train = n * 6 / 10;
  const std::size_t n_val = n * 2 / 10;
  if (n_train == 0 || n_val == 0 || n - n_train - n_val == 0) {
    throw ValidationError(fmt::format("{} points are too few for a 60/20/20 split", n));
  }
  Rng rng(seed);
  rng.shuffle(std::span<LabeledPoint>(points));
  DataSplit split;
  const auto b = points.begin();
  split.train.assign(b, b + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(b + static_cast<std::ptrdiff_t>(n_train), b + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(b + static_cast<std::ptrdiff_t>(n_train + n_val), points.end());
  return split;
}

LossGradient batch_loss_gradient(const ModelState& model, const LossSpec& spec, std::span<const LabeledPoint> data) {
  if (data.empty()) throw ValidationError("empty batch");
  const std::size_t num_classes = model.config.layers.back();
  const std::size_t depth = model.layers.size();

  // Per-layer gradient buffers laid out like flatten().
  std::vector<std::size_t> offset(depth);
  std::size_t total = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    offset[l] = total;
    total += model.layers[l].weights.size() + model.layers[l].bias.size();
  }
  LossGradient out;
  out.grad.assign(total, 0.0);

  for (const auto& p : data) {
    check_label(model, p);
    Trace trace;
    const auto z = forward(model, p.x, &trace);
    const LossEval e = eval_loss_grad(spec, z, ProbVector::one_hot(num_classes, static_cast<std::size_t>(p.label)));
    out.loss += e.value;

    std::vector<double> delta = e.grad_logits;
    for (std::size_t l = depth; l-- > 0;) {
      const DenseLayer& layer = model.layers[l];
      const auto& input = trace.inputs[l];
      double* gw = &out.grad[offset[l]];
      double* gb = gw + layer.weights.size();
      for (std::size_t o = 0; o < layer.out; ++o) {
        for (std::size_t i = 0; i < layer.in; ++i) gw[o * layer.in + i] += delta[o] * input[i];
        gb[o] += delta[o];
      }
      if (l == 0) break;
      std::vector<double> back(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double* row = &layer.weights[o * layer.in];
        for (std::size_t i = 0; i < layer.in; ++i) back[i] += row[i] * delta[o];
      }
      const auto& pre = trace.pre[l - 1];
      for (std::size_t i = 0; i < layer.in; ++i) {
        back[i] *= activate_grad(model.config.activation, pre[i], input[i]);
      }
      delta = std::move(back);
    }
  }
  const double n = static_cast<double>(data.size());
  out.loss /= n;
  for (auto& g : out.grad) g /= n;
  return out;
}

double batch_loss(const ModelState& model, const LossSpec& spec, std::span<const LabeledPoint> data) {
  if (data.empty()) throw ValidationError("empty batch");
  const std::size_t num_classes = model.config.layers.back();
  double total = 0.0;
  for (const auto& p : data) {
    check_label(model, p);
    const auto z = model.logits(p.x);
    total += eval_loss(spec, ProbVector::from_logits(z),
                       ProbVector::one_hot(num_classes, static_cast<std::size_t>(p.label)));
  }
  return total / static_cast<double>(data.size());
}

PredictionSet predict_set(const ModelState& model, std::span<const LabeledPoint> data) {
  std::vector<PredictionRecord> records;
  records.reserve(data.size());
  for (const auto& p : data) {
    check_label(model, p);
    auto z = model.logits(p.x);
    PredictionRecord r{ProbVector::from_logits(z), static_cast<std::size_t>(p.label), p.eta, std::move(z)};
    records.push_back(std::move(r));
  }
  return PredictionSet(std::move(records));
}

namespace {

class Optimizer {
 public:
  Optimizer(const MLPConfig& cfg, std::size_t size) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

  void step(std::vector<double>& params, std::vector<double> grad) {
    if (cfg_.weight_decay > 0.0) {
      for (std::size_t i = 0; i < params.size(); ++i) grad[i] += cfg_.weight_decay * params[i];
    }
    if (cfg_.optimizer == OptimizerKind::sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg_.lr * grad[i];
      return;
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
      v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
      params[i] -= cfg_.lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

 private:
  MLPConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace

TrainResult train(const MLPConfig& cfg, const LossSpec& spec, std::span<const LabeledPoint> train_data,
                  std::span<const LabeledPoint> test_data) {
  spec.validate();
  if (train_data.empty()) throw ValidationError("training data is empty");
  if (test_data.empty()) throw ValidationError("test data is empty");
  TrainResult out;
  out.model = init_model(cfg);
  out.history.reserve(cfg.epochs);
  std::vector<double> params = out.model.flatten();
  Optimizer opt(cfg, params.size());

  for (const auto& p : train_data) check_label(out.model, p);
  for (const auto& p : test_data) check_label(out.model, p);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    LossGradient lg;
    EpochRecord rec;
    try {
      lg = batch_loss_gradient(out.model, spec, train_data);
      rec.train_loss = lg.loss;
      rec.test_loss = batch_loss(out.model, spec, test_data);
      const PredictionSet test_set = predict_set(out.model, test_data);
      rec.test_ece = ece(test_set);
      const ScoreMetrics scores = score_metrics(test_set);
      rec.test_nll = scores.nll;
      rec.test_error = scores.error;
    } catch (const ValidationError& e) {
      throw ConvergenceError(fmt::format("training diverged at epoch {} ({})", epoch + 1, e.what()));
    }
    const bool finite_grad = std::all_of(lg.grad.begin(), lg.grad.end(), [](double g) { return std::isfinite(g); });
    if (!std::isfinite(lg.loss) || !finite_grad) {
      throw ConvergenceError(fmt::format("training diverged at epoch {} (train loss {})", epoch + 1, lg.loss));
    }
    out.history.push_back(rec);

    opt.step(params, std::move(lg.grad));
    out.model.unflatten(params);
  }
  for (double p : params) {
    if (!std::isfinite(p)) throw ConvergenceError(fmt::format("training diverged at epoch {}", cfg.epochs));
  }
  return out;
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
  out << "epoch,train_loss,test_loss,test_ece,test_nll,test_error\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    out << (i + 1) << ',' << format_double(h.train_loss) << ',' << format_double(h.test_loss) << ','
        << format_double(h.test_ece) << ',' << format_double(h.test_nll) << ',' << format_double(h.test_error) << '\n';
  }
}

DecisionGrid decision_grid(const ModelState& model, const Bounds& bounds, std::size_t resolution) {
  if (resolution < 2) throw ValidationError("grid resolution must be >= 2");
  if (!(bounds.x0_max > bounds.x0_min) || !(bounds.x1_max > bounds.x1_min) || !std::isfinite(bounds.x0_min) ||
      !std::isfinite(bounds.x0_max) || !std::isfinite(bounds.x1_min) || !std::isfinite(bounds.x1_max)) {
    throw ValidationError("grid bounds must be finite with max > min");
  }
  DecisionGrid grid;
  grid.resolution = resolution;
  grid.points.reserve(resolution * resolution);
  grid.probs.reserve(resolution * resolution);
  const double span = static_cast<double>(resolution - 1);
  for (std::size_t r = 0; r < resolution; ++r) {
    const double x1 = bounds.x1_min + (bounds.x1_max - bounds.x1_min) * static_cast<double>(r) / span;
    for (std::size_t c = 0; c < resolution; ++c) {
      const double x0 = bounds.x0_min + (bounds.x0_max - bounds.x0_min) * static_cast<double>(c) / span;
      const std::array<double, 2> x{x0, x1};
      grid.points.push_back(x);
      grid.probs.push_back(model.predict(x));
    }
  }
  return grid;
}

double confident_fraction(const DecisionGrid& grid, double threshold) {
  if (grid.probs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& p : grid.probs) {
    if (p.max() > threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(grid.probs.size());
}

void write_grid_csv(std::ostream& out, const DecisionGrid& grid) {
  out << "x0,x1";
  const std::size_t k = grid.probs.empty() ? 0 : grid.probs.front().size();
  for (std::size_t i = 0; i < k; ++i) out << ",p_" << i;
  out << '\n';
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    out << format_double(grid.points[i][0]) << ',' << format_double(grid.points[i][1]);
    for (double p : grid.probs[i]) out << ',' << format_double(p);
    out << '\n';
  }
}

std::vector<SweepRow> lambda_sweep(const MLPConfig& cfg, std::span<const double> gammas,
                                   std::span<const double> lambdas, const DataSplit& split, std::size_t bins) {
  if (gammas.empty() || lambdas.empty()) throw ValidationError("gamma and lambda lists must be nonempty");
  std::vector<SweepRow> rows;
  for (double gamma : gammas) {
    for (double lambda : lambdas) {
      const LossSpec spec = lambda == 0.0 ? LossSpec::focal(gamma) : LossSpec::fcl(gamma, lambda);
      const TrainResult trained = train(cfg, spec, split.train, split.test);
      const PredictionSet val = predict_set(trained.model, split.val);
      TemperatureScanConfig scan_cfg;
      scan_cfg.bins = bins;
      const TemperatureScanResult scan = temperature_scan(val, scan_cfg);
      const PredictionSet test = predict_set(trained.model, split.test);
      const PredictionSet scaled = apply_temperature(test, scan.best_t);
      SweepRow row;
      row.gamma = gamma;
      row.lambda = lambda;
      row.best_t = scan.best_t;
      row.pre_ece = ece(test, bins);
      row.post_ece = ece(scaled, bins);
      row.pre_adaece = adaece(test, bins);
      row.post_adaece = adaece(scaled, bins);
      row.pre_cwece = classwise_ece(test, bins);
      row.post_cwece = classwise_ece(scaled, bins);
      const ScoreMetrics scores = score_metrics(test);
      row.nll = scores.nll;
      row.error = scores.error;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "gamma,lambda,best_t,pre_ece,post_ece,pre_adaece,post_adaece,pre_cwece,post_cwece,nll,error\n";
  for (const auto& r : rows) {
    out << format_double(r.gamma) << ',' << format_double(r.lambda) << ',' << format_double(r.best_t) << ','
        << format_double(r.pre_ece) << ',' << format_double(r.post_ece) << ',' << format_double(r.pre_adaece) << ','
        << format_double(r.post_adaece) << ',' << format_double(r.pre_cwece) << ',' << format_double(r.post_cwece)
        << ',' << format_double(r.nll) << ',' << format_double(r.error) << '\n';
  }
}

}  // namespace fcl
