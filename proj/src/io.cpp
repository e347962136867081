#include "opg/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace opg {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
}

const json& field(const json& obj, const char* key, const std::string& source) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(source + ": missing field '" + key + "'");
  return obj.at(key);
}

std::string as_string(const json& j, const std::string& source) {
  if (!j.is_string()) throw ValidationError(source + ": expected a string id");
  return j.get<std::string>();
}

WeakRanking ranking_from_json(const json& j, const std::string& source) {
  if (!j.is_array()) throw ValidationError(source + ": ranking must be an array of arrays");
  std::vector<std::vector<ItemId>> groups;
  for (const auto& g : j) {
    if (!g.is_array()) throw ValidationError(source + ": ranking must be an array of arrays");
    std::vector<ItemId> group;
    for (const auto& id : g) group.emplace_back(as_string(id, source));
    groups.push_back(std::move(group));
  }
  return WeakRanking(std::move(groups));
}

json rounded(double v) { return round_sig12(v); }

}  // namespace

double round_sig12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

Dataset parse_cardinal_csv_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::map<GraderId, std::map<ItemId, double>> grades;
  std::set<ItemId> items;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header) {
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line != "grader_id,item_id,score") {
        throw ValidationError(source + ": line 1: header must be exactly 'grader_id,item_id,score'");
      }
      header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    const std::string where = source + ": line " + std::to_string(line_no) + ": ";
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 3) throw ValidationError(where + "expected 3 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty()) throw ValidationError(where + "empty id");
    char* end = nullptr;
    const double score = std::strtod(fields[2].c_str(), &end);
    if (fields[2].empty() || *end != '\0') throw ValidationError(where + "malformed score '" + fields[2] + "'");
    if (!std::isfinite(score)) throw ValidationError(where + "non-finite score");
    ItemId item(fields[1]);
    auto& row = grades[GraderId(fields[0])];
    if (!row.emplace(item, score).second) {
      throw ValidationError(where + "duplicate (grader, item) pair (" + fields[0] + ", " + fields[1] + ")");
    }
    items.insert(std::move(item));
  }
  if (!header) throw ValidationError(source + ": empty file (missing header)");
  std::vector<GraderId> graders;
  std::vector<GraderFeedback> feedback;
  for (auto& [g, row] : grades) {
    graders.push_back(g);
    feedback.push_back(GraderFeedback::from_cardinal(g, std::move(row)));
  }
  return Dataset(std::vector<ItemId>(items.begin(), items.end()), std::move(graders), std::move(feedback));
}

Dataset parse_cardinal_csv(const std::string& path) { return parse_cardinal_csv_text(read_file(path), path); }

std::string to_cardinal_csv(const Dataset& data) {
  std::string out = "grader_id,item_id,score\n";
  char buf[64];
  for (const auto& fb : data.feedback()) {
    if (!fb.cardinal) throw ValidationError("grader '" + fb.grader.str() + "' has no cardinal grades to write");
    for (const auto& [item, y] : *fb.cardinal) {
      std::snprintf(buf, sizeof buf, "%.17g", y);
      out += fb.grader.str() + "," + item.str() + "," + buf + "\n";
    }
  }
  return out;
}

Dataset parse_ordinal_json_text(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const auto& items_j = field(j, "items", source);
  const auto& graders_j = field(j, "graders", source);
  if (!items_j.is_array() || !graders_j.is_array()) {
    throw ValidationError(source + ": 'items' and 'graders' must be arrays");
  }
  std::vector<ItemId> items;
  for (const auto& id : items_j) items.emplace_back(as_string(id, source));
  std::vector<GraderId> graders;
  std::vector<GraderFeedback> feedback;
  for (const auto& g : graders_j) {
    GraderId id(as_string(field(g, "id", source), source));
    graders.push_back(id);
    try {
      feedback.push_back(GraderFeedback::from_ordinal(id, ranking_from_json(field(g, "ranking", source), source)));
    } catch (const ValidationError& e) {
      throw ValidationError(source + ": grader '" + id.str() + "': " + e.what());
    }
  }
  std::set<GraderId> lazy;
  if (j.contains("lazy")) {
    for (const auto& id : j.at("lazy")) lazy.emplace(as_string(id, source));
  }
  try {
    return Dataset(std::move(items), std::move(graders), std::move(feedback), std::move(lazy));
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

Dataset parse_ordinal_json(const std::string& path) { return parse_ordinal_json_text(read_file(path), path); }

json ranking_to_json(const WeakRanking& ranking) {
  json out = json::array();
  for (const auto& group : ranking.groups()) {
    json g = json::array();
    for (const auto& item : group) g.push_back(item.str());
    out.push_back(std::move(g));
  }
  return out;
}

std::string to_ordinal_json(const Dataset& data) {
  json j;
  j["items"] = json::array();
  for (const auto& item : data.items()) j["items"].push_back(item.str());
  j["graders"] = json::array();
  for (const auto& fb : data.feedback()) {
    if (!fb.ordinal) throw ValidationError("grader '" + fb.grader.str() + "' has no ordinal ranking to write");
    j["graders"].push_back({{"id", fb.grader.str()}, {"ranking", ranking_to_json(*fb.ordinal)}});
  }
  if (!data.lazy().empty()) {
    j["lazy"] = json::array();
    for (const auto& g : data.lazy()) j["lazy"].push_back(g.str());
  }
  return j.dump(2) + "\n";
}

Dataset read_dataset(const std::string& path, const std::string& format) {
  if (format == "ordinal") return parse_ordinal_json(path);
  if (format == "cardinal") return parse_cardinal_csv(path);
  throw ValidationError("format must be 'ordinal' or 'cardinal', got '" + format + "'");
}

std::map<ItemId, double> percentile_ranks(const WeakRanking& ranking) {
  std::map<ItemId, double> out;
  const double n = static_cast<double>(ranking.size());
  double start = 1.0;
  for (const auto& group : ranking.groups()) {
    const double mid = start + (static_cast<double>(group.size()) - 1.0) / 2.0;
    for (const auto& item : group) out.emplace(item, n > 1.0 ? 100.0 * (n - mid) / (n - 1.0) : 100.0);
    start += static_cast<double>(group.size());
  }
  return out;
}

json config_to_json(const ModelConfig& cfg) {
  json j;
  j["score_prior"] = {{"mean", cfg.score_prior.mean}, {"variance", cfg.score_prior.variance}};
  j["reliability_prior"] = {{"shape", cfg.reliability_prior.shape}, {"scale", cfg.reliability_prior.scale}};
  j["sgd"] = {{"learning_rate", cfg.sgd.learning_rate},
              {"decay", cfg.sgd.decay == DecaySchedule::kInverseSqrt ? "inverse_sqrt" : "constant"},
              {"max_epochs", cfg.sgd.max_epochs},
              {"rel_tolerance", cfg.sgd.rel_tolerance},
              {"seed", cfg.sgd.seed},
              {"alternating_iterations", cfg.sgd.alternating_iterations},
              {"refine_iterations", cfg.sgd.refine_iterations},
              {"gradient_tolerance", cfg.sgd.gradient_tolerance}};
  j["ncs"] = {{"mu0", cfg.ncs.mu0 ? json(*cfg.ncs.mu0) : json(nullptr)},
              {"gamma0", cfg.ncs.gamma0},
              {"alpha0", cfg.ncs.alpha0},
              {"beta0", cfg.ncs.beta0},
              {"gamma1", cfg.ncs.gamma1}};
  j["tie_epsilon"] = cfg.tie_epsilon;
  j["mals_cap"] = cfg.mals_cap;
  return j;
}

std::string estimate_to_json(const Estimate& est, const std::string& model, std::uint64_t seed,
                             const json& config) {
  json j;
  j["model"] = model;
  j["seed"] = seed;
  j["config"] = config;
  j["ranking"] = ranking_to_json(est.ranking);
  if (est.scores) {
    json s = json::object();
    for (const auto& [item, v] : *est.scores) s[item.str()] = rounded(v);
    j["scores"] = std::move(s);
  }
  json p = json::object();
  for (const auto& [item, v] : percentile_ranks(est.ranking)) p[item.str()] = rounded(v);
  j["percentile"] = std::move(p);
  if (est.reliabilities) {
    json r = json::object();
    for (const auto& [g, v] : *est.reliabilities) r[g.str()] = rounded(v);
    j["reliabilities"] = std::move(r);
  }
  j["metadata"] = est.metadata;
  return j.dump(2) + "\n";
}

Estimate parse_ranking_json_text(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  Estimate est;
  est.ranking = ranking_from_json(field(j, "ranking", source), source);
  auto number_map = [&](const json& obj) {
    if (!obj.is_object()) throw ValidationError(source + ": expected an object of numbers");
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [k, v] : obj.items()) {
      if (!v.is_number()) throw ValidationError(source + ": value for '" + k + "' is not a number");
      out.emplace_back(k, v.get<double>());
    }
    return out;
  };
  if (j.contains("scores")) {
    std::map<ItemId, double> s;
    for (const auto& [k, v] : number_map(j.at("scores"))) s.emplace(ItemId(k), v);
    est.scores = std::move(s);
  }
  if (j.contains("reliabilities")) {
    std::map<GraderId, double> r;
    for (const auto& [k, v] : number_map(j.at("reliabilities"))) r.emplace(GraderId(k), v);
    est.reliabilities = std::move(r);
  }
  return est;
}

Estimate parse_ranking_file(const std::string& path) { return parse_ranking_json_text(read_file(path), path); }

json report_to_json(const ExperimentReport& report) {
  json j;
  j["experiment"] = report.experiment;
  j["method"] = report.method;
  j["seed"] = report.seed;
  j["parameters"] = report.parameters;
  j["series"] = json::array();
  for (const auto& s : report.series) {
    j["series"].push_back({{"name", s.name}, {"x", s.x}, {"mean", s.mean}, {"std", s.std}});
  }
  return j;
}

ExperimentReport report_from_json(const json& j) {
  const std::string src = "<report>";
  ExperimentReport r;
  try {
    r.experiment = field(j, "experiment", src).get<std::string>();
    r.method = field(j, "method", src).get<std::string>();
    r.seed = field(j, "seed", src).get<std::uint64_t>();
    r.parameters = field(j, "parameters", src).get<std::map<std::string, std::string>>();
    for (const auto& s : field(j, "series", src)) {
      r.series.push_back(Series{s.at("name").get<std::string>(), s.at("x").get<std::vector<double>>(),
                                s.at("mean").get<std::vector<double>>(), s.at("std").get<std::vector<double>>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed experiment report: ") + e.what());
  }
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << contents;
    out.flush();
    if (!out) throw ValidationError("failed writing '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot move output into place at '" + path + "'");
  }
}

}  // namespace opg
