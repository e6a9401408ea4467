// fclkit: command-line front end for the calibration toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "fcl/calibrate.hpp"
#include "fcl/data.hpp"
#include "fcl/error.hpp"
#include "fcl/io.hpp"
#include "fcl/metrics.hpp"
#include "fcl/serialize.hpp"
#include "fcl/theory.hpp"
#include "fcl/train.hpp"

namespace {

using nlohmann::json;
using namespace fcl;

struct InputOpts {
  std::string path;
  std::string format = "auto";
  std::string kind = "auto";
};

void add_input(CLI::App* cmd, InputOpts& in, const std::string& flag, const std::string& what) {
  cmd->add_option(flag, in.path, what)->required();
  cmd->add_option("--format", in.format, "Row format: json, csv or auto (by extension)")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "json", "csv"}));
  cmd->add_option("--input-kind", in.kind, "Row contents: probs, logits or auto (detected from the file)")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "probs", "logits"}));
}

RowFormat resolve_format(const InputOpts& in) {
  if (in.format == "auto") return row_format_for(in.path);
  return parse_row_format(in.format);
}

InputKind resolve_kind(const InputOpts& in, RowFormat format) {
  if (in.kind != "auto") return parse_input_kind(in.kind);
  std::ifstream file(in.path);
  if (!file) throw ValidationError(fmt::format("cannot open '{}'", in.path));
  std::string line;
  while (std::getline(file, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (format == RowFormat::csv_rows) return line.rfind("z_", 0) == 0 ? InputKind::logits : InputKind::probs;
    const bool has_probs = line.find("\"probs\"") != std::string::npos;
    const bool has_logits = line.find("\"logits\"") != std::string::npos;
    return has_logits && !has_probs ? InputKind::logits : InputKind::probs;
  }
  return InputKind::probs;
}

PredictionSet load(const InputOpts& in, json& config, const std::string& key) {
  const RowFormat format = resolve_format(in);
  const InputKind kind = resolve_kind(in, format);
  config[key] = in.path;
  config[key + "_format"] = format == RowFormat::csv_rows ? "csv" : "json";
  config[key + "_kind"] = kind == InputKind::logits ? "logits" : "probs";
  return load_predictions(in.path, format, kind);
}

struct LossOpts {
  std::string loss = "fcl";
  double gamma = 3.0;
  double lambda = 0.5;
  double alpha = 0.05;
};

void add_loss(CLI::App* cmd, LossOpts& l) {
  cmd->add_option("--loss", l.loss, "Loss family: ce, ls, brier, focal, flsd53, fcl")->capture_default_str();
  cmd->add_option("--gamma", l.gamma, "Focusing parameter (focal, fcl)")->capture_default_str();
  cmd->add_option("--lambda", l.lambda, "Weight of the squared-error term (fcl)")->capture_default_str();
  cmd->add_option("--alpha", l.alpha, "Smoothing weight (ls)")->capture_default_str();
}

LossSpec resolve_loss(const LossOpts& l) {
  LossSpec spec;
  spec.family = parse_loss_family(l.loss);
  switch (spec.family) {
    case LossFamily::focal: spec.gamma = l.gamma; break;
    case LossFamily::fcl:
      spec.gamma = l.gamma;
      spec.lambda = l.lambda;
      break;
    case LossFamily::label_smoothing: spec.alpha = l.alpha; break;
    default: break;
  }
  spec.validate();
  return spec;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text << std::flush;
  } else {
    atomic_write(out_path, text);
  }
}

std::string dump(const json& j) {
  return j.dump(2) + "\n";
}

void print_config(const std::string& command, json config) {
  config["command"] = command;
  std::cerr << "config: " << config.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration metrics, focal calibration loss probes and toy training"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // metrics
  InputOpts metrics_in;
  std::size_t metrics_bins = kDefaultBins;
  std::string metrics_scheme = "equal_width";
  std::string metrics_norm = "global";
  std::string metrics_out;
  auto* metrics = app.add_subcommand("metrics", "ECE, MCE, AdaECE, classwise ECE, smCE, NLL, Brier, error (and AUROC for K = 2)");
  add_input(metrics, metrics_in, "--input", "Prediction rows");
  metrics->add_option("--bins", metrics_bins, "Number of bins")->capture_default_str()->check(CLI::PositiveNumber);
  metrics->add_option("--scheme", metrics_scheme, "Reliability-table binning: equal_width or equal_mass")
      ->capture_default_str();
  metrics->add_option("--cwece-norm", metrics_norm, "Classwise ECE normaliser: global or per-class")
      ->capture_default_str();
  metrics->add_option("--out", metrics_out, "JSON report path (stdout if omitted)");

  // reliability
  InputOpts rel_in;
  std::size_t rel_bins = kDefaultBins;
  std::string rel_scheme = "equal_width";
  std::string rel_out;
  auto* reliability = app.add_subcommand("reliability", "Reliability-diagram table as CSV");
  add_input(reliability, rel_in, "--input", "Prediction rows");
  reliability->add_option("--bins", rel_bins, "Number of bins")->capture_default_str()->check(CLI::PositiveNumber);
  reliability->add_option("--scheme", rel_scheme, "equal_width or equal_mass")->capture_default_str();
  reliability->add_option("--out", rel_out, "CSV path (stdout if omitted)");

  // smce
  InputOpts smce_in;
  std::string smce_out;
  auto* smce_cmd = app.add_subcommand("smce", "Smooth calibration error with its optimal witness");
  add_input(smce_cmd, smce_in, "--input", "Prediction rows");
  smce_cmd->add_option("--out", smce_out, "JSON path (stdout if omitted)");

  // temp-scale
  InputOpts ts_val;
  std::optional<std::string> ts_test;
  std::size_t ts_bins = kDefaultBins;
  TemperatureScanConfig ts_cfg;
  std::string ts_out;
  std::string ts_grid_out;
  auto* temp = app.add_subcommand("temp-scale", "Pick a temperature on validation logits by grid search on ECE");
  add_input(temp, ts_val, "--val", "Validation rows with logits");
  temp->add_option("--test", ts_test, "Test rows with logits; reports ECE before and after scaling");
  temp->add_option("--bins", ts_bins, "Number of ECE bins")->capture_default_str()->check(CLI::PositiveNumber);
  temp->add_option("--t-min", ts_cfg.t_min, "Smallest temperature")->capture_default_str();
  temp->add_option("--t-max", ts_cfg.t_max, "Largest temperature")->capture_default_str();
  temp->add_option("--t-step", ts_cfg.t_step, "Grid step")->capture_default_str();
  temp->add_option("--out", ts_out, "JSON path (stdout if omitted)");
  temp->add_option("--grid-out", ts_grid_out, "CSV of the scan (t,ece)");

  // pgap
  InputOpts pg_in;
  LossOpts pg_loss;
  std::string pg_out;
  auto* pgap_cmd = app.add_subcommand("pgap", "Post-processing gap of binary predictions");
  add_input(pgap_cmd, pg_in, "--input", "Binary prediction rows");
  add_loss(pgap_cmd, pg_loss);
  pgap_cmd->add_option("--out", pg_out, "JSON path (stdout if omitted)");

  // minimize
  std::string min_eta;
  LossOpts min_loss;
  std::string min_out;
  auto* minimize = app.add_subcommand("minimize", "Risk minimizer on the simplex for a class posterior");
  minimize->add_option("--eta", min_eta, "Class posterior, comma separated")->required();
  add_loss(minimize, min_loss);
  minimize->add_option("--out", min_out, "JSON path (stdout if omitted)");

  // curve
  LossOpts curve_loss;
  double curve_step = 0.01;
  std::string curve_out;
  auto* curve = app.add_subcommand("curve", "Binary optimal prediction for each true probability (CSV q,p_hat_star)");
  add_loss(curve, curve_loss);
  curve->add_option("--step", curve_step, "Grid step on [0, 1]")->capture_default_str();
  curve->add_option("--out", curve_out, "CSV path (stdout if omitted)");

  // sigma-root
  SigmaSpec sigma;
  sigma.gamma = 3.0;
  sigma.lambda = 0.5;
  auto* sigma_cmd = app.add_subcommand("sigma-root", "Unique zero of sigma(q) on (0, 1)");
  sigma_cmd->add_option("--gamma", sigma.gamma, "gamma >= 0")->capture_default_str();
  sigma_cmd->add_option("--lambda", sigma.lambda, "lambda > 0")->capture_default_str();

  // synth
  SyntheticConfig syn;
  std::string syn_kind = "moons";
  std::string syn_out;
  auto* synth = app.add_subcommand("synth", "Synthetic two-class points (CSV x0,x1,label)");
  synth->add_option("--kind", syn_kind, "moons or gauss2")->capture_default_str();
  synth->add_option("--n", syn.n, "Number of points")->capture_default_str();
  synth->add_option("--noise", syn.noise, "Noise std (moons) or component spread (gauss2)")->capture_default_str();
  synth->add_option("--seed", syn.seed, "Random seed")->capture_default_str();
  synth->add_option("--class-sep", syn.class_sep, "Distance between gauss2 means")->capture_default_str();
  synth->add_option("--out", syn_out, "CSV path (stdout if omitted)");

  // train
  std::string tr_data;
  LossOpts tr_loss;
  MLPConfig tr_cfg;
  std::string tr_layers = "2,10,10,2";
  std::string tr_activation = "relu";
  std::string tr_optimizer = "adam";
  std::string tr_model_out;
  std::string tr_history_out;
  auto* train_cmd = app.add_subcommand("train", "Full-batch MLP training on a 60/20/20 split of a points CSV");
  train_cmd->add_option("--data", tr_data, "Points CSV (x0,x1,label)")->required();
  add_loss(train_cmd, tr_loss);
  train_cmd->add_option("--epochs", tr_cfg.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--seed", tr_cfg.seed, "Seed for initialisation and the split")->capture_default_str();
  train_cmd->add_option("--lr", tr_cfg.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--weight-decay", tr_cfg.weight_decay, "L2 weight decay")->capture_default_str();
  train_cmd->add_option("--layers", tr_layers, "Layer widths, comma separated")->capture_default_str();
  train_cmd->add_option("--activation", tr_activation, "relu or tanh")->capture_default_str();
  train_cmd->add_option("--optimizer", tr_optimizer, "adam or sgd")->capture_default_str();
  train_cmd->add_option("--out-model", tr_model_out, "Model JSON path");
  train_cmd->add_option("--out-history", tr_history_out, "Per-epoch history CSV path");

  // boundary
  std::string bd_model;
  std::size_t bd_resolution = 100;
  Bounds bd_bounds;
  std::string bd_out;
  auto* boundary = app.add_subcommand("boundary", "Predicted probabilities on a grid (CSV x0,x1,p_0,...)");
  boundary->add_option("--model", bd_model, "Model JSON")->required();
  boundary->add_option("--resolution", bd_resolution, "Points per axis")->capture_default_str();
  boundary->add_option("--x0-min", bd_bounds.x0_min, "Grid bound")->capture_default_str();
  boundary->add_option("--x0-max", bd_bounds.x0_max, "Grid bound")->capture_default_str();
  boundary->add_option("--x1-min", bd_bounds.x1_min, "Grid bound")->capture_default_str();
  boundary->add_option("--x1-max", bd_bounds.x1_max, "Grid bound")->capture_default_str();
  boundary->add_option("--out", bd_out, "CSV path (stdout if omitted)");

  // sweep
  std::string sw_data;
  std::string sw_gammas = "3";
  std::string sw_lambdas = "0,0.5,1,1.5";
  MLPConfig sw_cfg;
  std::size_t sw_bins = kDefaultBins;
  std::string sw_out;
  auto* sweep = app.add_subcommand("sweep", "Train one model per (gamma, lambda) and report calibration before/after temperature scaling");
  sweep->add_option("--data", sw_data, "Points CSV")->required();
  sweep->add_option("--gammas", sw_gammas, "Comma-separated gammas")->capture_default_str();
  sweep->add_option("--lambdas", sw_lambdas, "Comma-separated lambdas")->capture_default_str();
  sweep->add_option("--epochs", sw_cfg.epochs, "Epochs per model")->capture_default_str();
  sweep->add_option("--seed", sw_cfg.seed, "Seed for initialisation and the split")->capture_default_str();
  sweep->add_option("--lr", sw_cfg.lr, "Learning rate")->capture_default_str();
  sweep->add_option("--bins", sw_bins, "ECE bins")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--out", sw_out, "CSV path (stdout if omitted)");

  // auroc
  std::string au_pos;
  std::string au_neg;
  auto* auroc_cmd = app.add_subcommand("auroc", "AUROC of scores for positives against negatives");
  auroc_cmd->add_option("--pos", au_pos, "File of positive-class scores")->required();
  auroc_cmd->add_option("--neg", au_neg, "File of negative-class scores")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    json config;
    if (metrics->parsed()) {
      config["bins"] = metrics_bins;
      const BinningConfig cfg{metrics_bins, parse_bin_scheme(metrics_scheme)};
      const ClasswiseNorm norm = parse_classwise_norm(metrics_norm);
      config["scheme"] = cfg.scheme == BinScheme::equal_width ? "equal_width" : "equal_mass";
      config["cwece_norm"] = norm == ClasswiseNorm::global ? "global" : "per-class";
      const PredictionSet set = load(metrics_in, config, "input");
      print_config("metrics", config);
      emit(metrics_out, dump(json(evaluate(set, cfg, norm))));
    } else if (reliability->parsed()) {
      config["bins"] = rel_bins;
      const BinningConfig cfg{rel_bins, parse_bin_scheme(rel_scheme)};
      config["scheme"] = cfg.scheme == BinScheme::equal_width ? "equal_width" : "equal_mass";
      const PredictionSet set = load(rel_in, config, "input");
      print_config("reliability", config);
      std::ostringstream out;
      write_reliability_csv(out, reliability_table(set, cfg));
      emit(rel_out, out.str());
    } else if (smce_cmd->parsed()) {
      const PredictionSet set = load(smce_in, config, "input");
      print_config("smce", config);
      emit(smce_out, dump(json(smce(set))));
    } else if (temp->parsed()) {
      ts_cfg.bins = ts_bins;
      config["bins"] = ts_bins;
      config["t_min"] = ts_cfg.t_min;
      config["t_max"] = ts_cfg.t_max;
      config["t_step"] = ts_cfg.t_step;
      const PredictionSet val = load(ts_val, config, "val");
      std::optional<PredictionSet> test;
      if (ts_test) {
        InputOpts test_in = ts_val;
        test_in.path = *ts_test;
        test.emplace(load(test_in, config, "test"));
      }
      print_config("temp-scale", config);
      const TemperatureScanResult scan = temperature_scan(val, ts_cfg);
      json report = scan;
      if (test) {
        report["test_pre_ece"] = ece(*test, ts_bins);
        report["test_post_ece"] = ece(apply_temperature(*test, scan.best_t), ts_bins);
      }
      if (!ts_grid_out.empty()) {
        std::ostringstream grid;
        grid << "t,ece\n";
        for (const auto& p : scan.grid) grid << format_double(p.t) << ',' << format_double(p.ece) << '\n';
        atomic_write(ts_grid_out, grid.str());
      }
      emit(ts_out, dump(report));
    } else if (pgap_cmd->parsed()) {
      const LossSpec spec = resolve_loss(pg_loss);
      config["loss"] = spec;
      const PredictionSet set = load(pg_in, config, "input");
      print_config("pgap", config);
      emit(pg_out, dump(json(pgap(set, spec))));
    } else if (minimize->parsed()) {
      const LossSpec spec = resolve_loss(min_loss);
      const ProbVector eta(parse_number_list(min_eta));
      config["loss"] = spec;
      config["eta"] = eta.values();
      print_config("minimize", config);
      const MinimizerResult r = minimize_risk(spec, eta);
      emit(min_out, dump(json(r)));
      if (!r.converged) {
        std::cerr << "error: minimizer did not converge (KKT residual " << format_double(r.kkt_residual) << ")\n";
        return 2;
      }
    } else if (curve->parsed()) {
      const LossSpec spec = resolve_loss(curve_loss);
      config["loss"] = spec;
      config["step"] = curve_step;
      print_config("curve", config);
      const auto grid = unit_grid(curve_step);
      std::ostringstream out;
      out << "q,p_hat_star\n";
      for (const auto& p : optimal_curve(spec, grid)) out << format_double(p.q) << ',' << format_double(p.p_hat_star) << '\n';
      emit(curve_out, out.str());
    } else if (sigma_cmd->parsed()) {
      config["gamma"] = sigma.gamma;
      config["lambda"] = sigma.lambda;
      print_config("sigma-root", config);
      std::cout << format_double(sigma_root(sigma)) << '\n';
    } else if (synth->parsed()) {
      syn.kind = parse_synthetic_kind(syn_kind);
      config["kind"] = syn_kind;
      config["n"] = syn.n;
      config["noise"] = syn.noise;
      config["seed"] = syn.seed;
      config["class_sep"] = syn.class_sep;
      print_config("synth", config);
      std::ostringstream out;
      write_points(out, generate(syn));
      emit(syn_out, out.str());
    } else if (train_cmd->parsed()) {
      const LossSpec spec = resolve_loss(tr_loss);
      tr_cfg.layers.clear();
      for (double w : parse_number_list(tr_layers)) {
        if (!(w >= 1.0) || w != static_cast<double>(static_cast<std::size_t>(w))) {
          throw ValidationError(fmt::format("invalid layer width {}", w));
        }
        tr_cfg.layers.push_back(static_cast<std::size_t>(w));
      }
      tr_cfg.activation = parse_activation(tr_activation);
      tr_cfg.optimizer = parse_optimizer(tr_optimizer);
      tr_cfg.validate();
      config["data"] = tr_data;
      config["loss"] = spec;
      config["model"] = tr_cfg;
      print_config("train", config);
      const DataSplit split = split_dataset(load_points(tr_data), tr_cfg.seed);
      const TrainResult result = train(tr_cfg, spec, split.train, split.test);
      if (!tr_model_out.empty()) atomic_write(tr_model_out, dump(json(result.model)));
      if (!tr_history_out.empty()) {
        std::ostringstream hist;
        write_history_csv(hist, result.history);
        atomic_write(tr_history_out, hist.str());
      }
      const EpochRecord& last = result.history.back();
      json summary{{"final_train_loss", last.train_loss},
                   {"test_loss", last.test_loss},
                   {"test_ece", last.test_ece},
                   {"test_nll", last.test_nll},
                   {"test_error", last.test_error}};
      std::cout << dump(summary);
    } else if (boundary->parsed()) {
      config["model"] = bd_model;
      config["resolution"] = bd_resolution;
      config["bounds"] = {bd_bounds.x0_min, bd_bounds.x0_max, bd_bounds.x1_min, bd_bounds.x1_max};
      print_config("boundary", config);
      const ModelState model = json::parse(read_file(bd_model)).get<ModelState>();
      const DecisionGrid grid = decision_grid(model, bd_bounds, bd_resolution);
      std::ostringstream out;
      write_grid_csv(out, grid);
      emit(bd_out, out.str());
      std::cerr << "confident_fraction: " << format_double(confident_fraction(grid)) << '\n';
    } else if (sweep->parsed()) {
      const auto gammas = parse_number_list(sw_gammas);
      const auto lambdas = parse_number_list(sw_lambdas);
      sw_cfg.validate();
      config["data"] = sw_data;
      config["gammas"] = gammas;
      config["lambdas"] = lambdas;
      config["model"] = sw_cfg;
      config["bins"] = sw_bins;
      print_config("sweep", config);
      const DataSplit split = split_dataset(load_points(sw_data), sw_cfg.seed);
      std::ostringstream out;
      write_sweep_csv(out, lambda_sweep(sw_cfg, gammas, lambdas, split, sw_bins));
      emit(sw_out, out.str());
    } else if (auroc_cmd->parsed()) {
      config["pos"] = au_pos;
      config["neg"] = au_neg;
      print_config("auroc", config);
      const auto pos = read_numbers(au_pos);
      const auto neg = read_numbers(au_neg);
      std::cout << format_double(auroc(pos, neg)) << '\n';
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
