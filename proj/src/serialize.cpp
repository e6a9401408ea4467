#include "fcl/serialize.hpp"

#include "fcl/error.hpp"

namespace fcl {

using nlohmann::json;

void to_json(json& j, const LossSpec& spec) {
  j = json{{"family", to_string(spec.family)}, {"gamma", spec.gamma}, {"lambda", spec.lambda}, {"alpha", spec.alpha}};
}

void from_json(const json& j, LossSpec& spec) {
  spec = LossSpec{};
  spec.family = parse_loss_family(j.at("family").get<std::string>());
  spec.gamma = j.value("gamma", 0.0);
  spec.lambda = j.value("lambda", 0.0);
  spec.alpha = j.value("alpha", 0.0);
  spec.validate();
}

void to_json(json& j, const BinSummary& bin) {
  j = json{{"lo", bin.lo},
           {"hi", bin.hi},
           {"count", bin.count},
           {"accuracy", bin.accuracy},
           {"confidence", bin.confidence},
           {"gap", bin.gap()}};
}

void to_json(json& j, const MetricReport& report) {
  j = json{{"ece", report.ece},     {"mce", report.mce},     {"adaece", report.adaece},
           {"cwece", report.cwece}, {"smce", report.smce},   {"nll", report.nll},
           {"brier", report.brier}, {"error", report.error}, {"bins", report.bins}};
  if (report.auroc) j["auroc"] = *report.auroc;
}

void to_json(json& j, const SmceResult& result) {
  j = json{{"value", result.value}, {"knots", result.witness.knots}, {"witness", result.witness.values}};
}

void to_json(json& j, const TemperatureScanResult& result) {
  json grid = json::array();
  for (const auto& p : result.grid) grid.push_back(json{{"t", p.t}, {"ece", p.ece}});
  j = json{{"best_t", result.best_t}, {"pre_ece", result.pre_ece}, {"post_ece", result.post_ece}, {"grid", grid}};
}

void to_json(json& j, const PGapResult& result) {
  j = json{{"raw_risk", result.raw_risk},
           {"optimized_risk", result.optimized_risk},
           {"pgap", result.pgap},
           {"map", json{{"knots", result.map.knots}, {"kappa", result.map.kappa}}}};
}

void to_json(json& j, const MinimizerResult& result) {
  j = json{{"q_star", result.q_star.values()},  {"objective", result.objective},
           {"iterations", result.iterations},    {"converged", result.converged},
           {"boundary", result.boundary},        {"kkt_residual", result.kkt_residual}};
}

void to_json(json& j, const MLPConfig& cfg) {
  j = json{{"layers", cfg.layers},
           {"activation", to_string(cfg.activation)},
           {"seed", cfg.seed},
           {"epochs", cfg.epochs},
           {"optimizer", to_string(cfg.optimizer)},
           {"lr", cfg.lr},
           {"weight_decay", cfg.weight_decay}};
}

void from_json(const json& j, MLPConfig& cfg) {
  cfg = MLPConfig{};
  cfg.layers = j.at("layers").get<std::vector<std::size_t>>();
  cfg.activation = parse_activation(j.at("activation").get<std::string>());
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.epochs = j.at("epochs").get<std::size_t>();
  cfg.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  cfg.lr = j.at("lr").get<double>();
  cfg.weight_decay = j.at("weight_decay").get<double>();
  cfg.validate();
}

void to_json(json& j, const ModelState& model) {
  json layers = json::array();
  for (const auto& l : model.layers) {
    layers.push_back(json{{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  }
  j = json{{"config", model.config}, {"layers", layers}};
}

void from_json(const json& j, ModelState& model) {
  model = ModelState{};
  model.config = j.at("config").get<MLPConfig>();
  for (const auto& lj : j.at("layers")) {
    DenseLayer l;
    l.in = lj.at("in").get<std::size_t>();
    l.out = lj.at("out").get<std::size_t>();
    l.weights = lj.at("weights").get<std::vector<double>>();
    l.bias = lj.at("bias").get<std::vector<double>>();
    if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) throw ValidationError("layer shape mismatch");
    model.layers.push_back(std::move(l));
  }
  const auto& widths = model.config.layers;
  if (model.layers.size() + 1 != widths.size()) throw ValidationError("layer count does not match config");
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (model.layers[i].in != widths[i] || model.layers[i].out != widths[i + 1]) {
      throw ValidationError("layer widths do not match config");
    }
  }
}

}  // namespace fcl
