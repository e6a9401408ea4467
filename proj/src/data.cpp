#include "fcl/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "fcl/error.hpp"
#include "fcl/io.hpp"
#include "fcl/rng.hpp"

namespace fcl {

using nlohmann::json;

PredictionSet::PredictionSet(std::vector<PredictionRecord> records) : records_(std::move(records)) {
  if (records_.empty()) throw ValidationError("prediction set is empty");
  num_classes_ = records_.front().probs.size();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.probs.size() != num_classes_) {
      throw ValidationError(fmt::format("record {}: expected {} classes, got {}", i, num_classes_, r.probs.size()));
    }
    if (r.label >= num_classes_) {
      throw ValidationError(fmt::format("record {}: label {} out of range for K={}", i, r.label, num_classes_));
    }
    if (r.eta && r.eta->size() != num_classes_) {
      throw ValidationError(fmt::format("record {}: eta has {} entries, expected {}", i, r.eta->size(), num_classes_));
    }
    if (r.logits && r.logits->size() != num_classes_) {
      throw ValidationError(fmt::format("record {}: {} logits, expected {}", i, r.logits->size(), num_classes_));
    }
  }
}

bool PredictionSet::has_logits() const {
  for (const auto& r : records_) {
    if (!r.logits) return false;
  }
  return true;
}

RowFormat parse_row_format(std::string_view name) {
  if (name == "rows-json" || name == "json" || name == "jsonl") return RowFormat::json_rows;
  if (name == "rows-csv" || name == "csv") return RowFormat::csv_rows;
  throw ValidationError(fmt::format("unknown row format '{}'", name));
}

InputKind parse_input_kind(std::string_view name) {
  if (name == "probs") return InputKind::probs;
  if (name == "logits") return InputKind::logits;
  throw ValidationError(fmt::format("unknown input kind '{}'", name));
}

RowFormat row_format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? RowFormat::csv_rows : RowFormat::json_rows;
}

namespace {

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
  throw ValidationError(fmt::format("line {}: {}", line, what));
}

std::vector<double> json_numbers(const json& value, std::size_t line, const char* key) {
  if (!value.is_array()) row_error(line, fmt::format("'{}' must be an array", key));
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) row_error(line, fmt::format("'{}' has a non-numeric entry", key));
    out.push_back(v.get<double>());
  }
  return out;
}

PredictionRecord make_record(std::vector<double> values, long long label, InputKind kind,
                             std::optional<std::vector<double>> eta, std::optional<std::vector<double>> logits,
                             std::size_t line) {
  if (values.size() < 2) row_error(line, "need at least 2 class scores");
  if (label < 0 || static_cast<std::size_t>(label) >= values.size()) {
    row_error(line, fmt::format("label {} out of range for K={}", label, values.size()));
  }
  try {
    PredictionRecord rec{
        kind == InputKind::logits ? ProbVector::from_logits(values) : ProbVector(values, kRowMassTolerance),
        static_cast<std::size_t>(label), std::nullopt, std::nullopt};
    if (kind == InputKind::logits) {
      rec.logits = std::move(values);
    } else if (logits) {
      rec.logits = std::move(logits);
    }
    if (eta) rec.eta = ProbVector(std::move(*eta), kRowMassTolerance);
    return rec;
  } catch (const ValidationError& e) {
    row_error(line, e.what());
  }
}

PredictionRecord parse_json_row(const std::string& text, InputKind kind, std::size_t line) {
  json row;
  try {
    row = json::parse(text);
  } catch (const json::parse_error& e) {
    row_error(line, fmt::format("malformed JSON ({})", e.what()));
  }
  if (!row.is_object()) row_error(line, "row must be a JSON object");
  const char* key = kind == InputKind::logits ? "logits" : "probs";
  if (!row.contains(key)) row_error(line, fmt::format("missing '{}'", key));
  if (!row.contains("label") || !row["label"].is_number_integer()) row_error(line, "missing integer 'label'");

  std::vector<double> values = json_numbers(row[key], line, key);
  std::optional<std::vector<double>> eta;
  if (row.contains("eta")) {
    eta = json_numbers(row["eta"], line, "eta");
    if (eta->size() != values.size()) row_error(line, "'eta' length differs from class count");
  }
  std::optional<std::vector<double>> logits;
  if (kind == InputKind::probs && row.contains("logits")) {
    logits = json_numbers(row["logits"], line, "logits");
    if (logits->size() != values.size()) row_error(line, "'logits' length differs from class count");
  }
  return make_record(std::move(values), row["label"].get<long long>(), kind, std::move(eta), std::move(logits), line);
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(',', start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

PredictionSet parse_predictions(std::istream& in, RowFormat format, InputKind kind) {
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t line_no = 0;

  if (format == RowFormat::json_rows) {
    while (std::getline(in, line)) {
      ++line_no;
      if (is_blank(line)) continue;
      records.push_back(parse_json_row(line, kind, line_no));
      if (records.back().probs.size() != records.front().probs.size()) {
        row_error(line_no, fmt::format("inconsistent class count: {} vs {}", records.back().probs.size(),
                                       records.front().probs.size()));
      }
    }
  } else {
    std::size_t num_classes = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_blank(line)) continue;
      const auto fields = split_commas(line);
      if (num_classes == 0) {
        const char prefix = kind == InputKind::logits ? 'z' : 'p';
        if (fields.size() < 3 || trim(fields.back()) != "label") {
          row_error(line_no, "header must end with 'label'");
        }
        for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
          if (trim(fields[k]) != fmt::format("{}_{}", prefix, k)) {
            row_error(line_no, fmt::format("header column {} should be {}_{}", k, prefix, k));
          }
        }
        num_classes = fields.size() - 1;
        continue;
      }
      if (fields.size() != num_classes + 1) {
        row_error(line_no, fmt::format("inconsistent class count: expected {} fields, got {}", num_classes + 1,
                                       fields.size()));
      }
      std::vector<double> values(num_classes);
      for (std::size_t k = 0; k < num_classes; ++k) {
        if (!parse_double(fields[k], values[k])) {
          row_error(line_no, fmt::format("malformed number '{}'", trim(fields[k])));
        }
      }
      long long label = 0;
      if (!parse_int(fields.back(), label)) row_error(line_no, fmt::format("malformed label '{}'", trim(fields.back())));
      records.push_back(make_record(std::move(values), label, kind, std::nullopt, std::nullopt, line_no));
    }
  }
  if (records.empty()) throw ValidationError("no prediction rows found");
  return PredictionSet(std::move(records));
}

PredictionSet load_predictions(const std::filesystem::path& path, RowFormat format, InputKind kind) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  return parse_predictions(in, format, kind);
}

void write_predictions(std::ostream& out, const PredictionSet& set, bool prefer_logits) {
  for (const auto& r : set) {
    json row;
    if (prefer_logits && r.logits) {
      row["logits"] = *r.logits;
    } else {
      row["probs"] = std::vector<double>(r.probs.begin(), r.probs.end());
    }
    row["label"] = r.label;
    if (r.eta) row["eta"] = std::vector<double>(r.eta->begin(), r.eta->end());
    out << row.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "moons") return SyntheticKind::moons;
  if (name == "gauss2") return SyntheticKind::gauss2;
  throw ValidationError(fmt::format("unknown synthetic kind '{}'", name));
}

namespace {

void check_common(const SyntheticConfig& cfg) {
  if (cfg.n < 2) throw ValidationError("synthetic data needs n >= 2");
  if (!(cfg.noise >= 0.0) || !std::isfinite(cfg.noise)) throw ValidationError("noise must be finite and >= 0");
}

}  // namespace

std::vector<LabeledPoint> gen_moons(const SyntheticConfig& cfg) {
  if (cfg.kind != SyntheticKind::moons) throw ValidationError("gen_moons called with a non-moons config");
  check_common(cfg);
  const std::size_t n_outer = (cfg.n + 1) / 2;
  const std::size_t n_inner = cfg.n / 2;
  Rng rng(cfg.seed);

  auto arc_angle = [](std::size_t i, std::size_t count) {
    return count == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
  };

  std::vector<LabeledPoint> points;
  points.reserve(cfg.n);
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double t = arc_angle(i, n_outer);
    points.push_back({{std::cos(t), std::sin(t)}, 0, std::nullopt});
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double t = arc_angle(i, n_inner);
    points.push_back({{1.0 - std::cos(t), 0.5 - std::sin(t)}, 1, std::nullopt});
  }
  if (cfg.noise > 0.0) {
    for (auto& p : points) {
      p.x[0] += cfg.noise * rng.normal();
      p.x[1] += cfg.noise * rng.normal();
    }
  }
  return points;
}

double gauss2_posterior(double x0, double class_sep, double spread) {
  if (spread == 0.0) {
    if (x0 == 0.0 || class_sep == 0.0) return 0.5;
    return x0 > 0.0 ? 1.0 : 0.0;
  }
  // log N(x; +s/2) - log N(x; -s/2) = s * x0 / spread^2
  const double a = class_sep * x0 / (spread * spread);
  return 1.0 / (1.0 + std::exp(-a));
}

std::vector<LabeledPoint> gen_gauss2(const SyntheticConfig& cfg) {
  if (cfg.kind != SyntheticKind::gauss2) throw ValidationError("gen_gauss2 called with a non-gauss2 config");
  check_common(cfg);
  if (!(cfg.class_sep >= 0.0)) throw ValidationError("class_sep must be >= 0");
  Rng rng(cfg.seed);
  const double half = 0.5 * cfg.class_sep;

  std::vector<LabeledPoint> points;
  points.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const int label = rng.uniform() < 0.5 ? 0 : 1;
    const double mean = label == 1 ? half : -half;
    const double x0 = mean + cfg.noise * rng.normal();
    const double x1 = cfg.noise * rng.normal();
    const double a = cfg.noise == 0.0 ? 0.0 : cfg.class_sep * x0 / (cfg.noise * cfg.noise);
    const double eta1 = cfg.noise == 0.0 ? gauss2_posterior(x0, cfg.class_sep, 0.0) : 1.0 / (1.0 + std::exp(-a));
    const double eta0 = cfg.noise == 0.0 ? 1.0 - eta1 : 1.0 / (1.0 + std::exp(a));
    points.push_back({{x0, x1}, label, ProbVector({eta0, eta1})});
  }
  return points;
}

std::vector<LabeledPoint> generate(const SyntheticConfig& cfg) {
  return cfg.kind == SyntheticKind::moons ? gen_moons(cfg) : gen_gauss2(cfg);
}

void write_points(std::ostream& out, std::span<const LabeledPoint> points) {
  const bool with_eta = !points.empty() && points.front().eta.has_value();
  out << (with_eta ? "x0,x1,label,eta_0,eta_1\n" : "x0,x1,label\n");
  for (const auto& p : points) {
    out << format_double(p.x[0]) << ',' << format_double(p.x[1]) << ',' << p.label;
    if (with_eta) {
      out << ',' << format_double((*p.eta)[0]) << ',' << format_double((*p.eta)[1]);
    }
    out << '\n';
  }
}

std::vector<LabeledPoint> read_points(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool with_eta = false;
  bool header_seen = false;
  std::vector<LabeledPoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split_commas(line);
    if (!header_seen) {
      if (fields.size() == 3 && trim(fields[0]) == "x0" && trim(fields[1]) == "x1" && trim(fields[2]) == "label") {
        with_eta = false;
      } else if (fields.size() == 5 && trim(fields[0]) == "x0" && trim(fields[3]) == "eta_0") {
        with_eta = true;
      } else {
        row_error(line_no, "header must be x0,x1,label[,eta_0,eta_1]");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != (with_eta ? 5u : 3u)) row_error(line_no, "wrong number of fields");
    LabeledPoint p;
    long long label = 0;
    if (!parse_double(fields[0], p.x[0]) || !parse_double(fields[1], p.x[1])) row_error(line_no, "malformed coordinate");
    if (!parse_int(fields[2], label) || (label != 0 && label != 1)) row_error(line_no, "label must be 0 or 1");
    p.label = static_cast<int>(label);
    if (with_eta) {
      double e0 = 0.0;
      double e1 = 0.0;
      if (!parse_double(fields[3], e0) || !parse_double(fields[4], e1)) row_error(line_no, "malformed eta");
      try {
        p.eta = ProbVector({e0, e1}, kRowMassTolerance);
      } catch (const ValidationError& e) {
        row_error(line_no, e.what());
      }
    }
    points.push_back(std::move(p));
  }
  if (points.empty()) throw ValidationError("no points found");
  return points;
}

std::vector<LabeledPoint> load_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  return read_points(in);
}

}  // namespace fcl
