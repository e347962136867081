// Command-line front end: estimate, evaluate, simulate, experiment.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "opg/experiments.hpp"
#include "opg/io.hpp"
#include "opg/methods.hpp"
#include "opg/metrics.hpp"
#include "opg/synth.hpp"

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string model;
  std::string input;
  std::string format;
  std::string output;
  std::uint64_t seed = 0;
  int iterations = 10;
  int reps = 0;
  std::vector<std::string> targets;
  std::size_t lazy_count = 10;
  std::string axis = "reviewers";
  std::vector<int> levels;
  double tie_epsilon = opg::kDefaultTieEpsilon;
  std::size_t bottom_k = 0;
};

std::string infer_format(const CommonOptions& o) {
  if (!o.format.empty()) return o.format;
  const auto& p = o.input;
  return p.size() >= 4 && p.compare(p.size() - 4, 4, ".csv") == 0 ? "cardinal" : "ordinal";
}

opg::ModelConfig model_config(const CommonOptions& o) {
  opg::ModelConfig cfg;
  cfg.sgd.seed = o.seed;
  cfg.sgd.alternating_iterations = o.iterations;
  cfg.tie_epsilon = o.tie_epsilon;
  cfg.validate();
  return cfg;
}

std::vector<opg::WeakRanking> load_targets(const std::vector<std::string>& paths) {
  if (paths.empty()) throw opg::ValidationError("at least one --target is required");
  std::vector<opg::WeakRanking> out;
  for (const auto& p : paths) out.push_back(opg::parse_ranking_file(p).ranking);
  return out;
}

std::vector<opg::Method> parse_methods(const std::string& list) {
  std::vector<opg::Method> out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) out.push_back(opg::parse_method(name));
  if (out.empty()) throw opg::ValidationError("--model is required");
  return out;
}

int run_estimate(const CommonOptions& o) {
  const auto method = opg::parse_method(o.model);
  const auto cfg = model_config(o);
  const auto data = opg::read_dataset(o.input, infer_format(o));
  const auto est = opg::estimate(data, method, cfg);
  opg::write_file_atomic(o.output, opg::estimate_to_json(est, opg::method_name(method), o.seed,
                                                         opg::config_to_json(cfg)));
  return 0;
}

int run_evaluate(const CommonOptions& o) {
  const auto predicted = opg::parse_ranking_file(o.input);
  std::vector<opg::WeakRanking> targets;
  std::vector<opg::Estimate> target_files;
  for (const auto& p : o.targets) target_files.push_back(opg::parse_ranking_file(p));
  if (target_files.empty()) throw opg::ValidationError("at least one --target is required");
  const auto items = target_files.front().ranking.item_set();
  for (const auto& t : target_files) {
    if (t.ranking.item_set() != items) throw opg::ValidationError("targets cover different items");
    targets.push_back(t.ranking);
  }
  for (const auto& item : items) {
    if (!predicted.ranking.contains(item)) throw opg::ValidationError("prediction misses item '" + item.str() + "'");
  }
  json result;
  const double ek = opg::ek_error(targets, predicted.ranking.restricted_to(items));
  result["ek"] = opg::round_sig12(ek);
  std::printf("E_K %.6f\n", ek);
  if (target_files.size() == 1 && predicted.scores && target_files.front().scores) {
    std::map<opg::ItemId, double> p;
    for (const auto& item : items) p.emplace(item, predicted.scores->at(item));
    const auto err = opg::cardinal_errors(p, *target_files.front().scores);
    std::printf("MAE %.6f\nRMSE %.6f\n", err.mae, err.rmse);
    result["mae"] = opg::round_sig12(err.mae);
    result["rmse"] = opg::round_sig12(err.rmse);
  }
  if (!o.output.empty()) opg::write_file_atomic(o.output, result.dump(2) + "\n");
  return 0;
}

int run_simulate(const CommonOptions& o, opg::SynthConfig cfg, const std::string& grader_model) {
  cfg.grader = opg::GraderModel::parse(grader_model);
  cfg.seed = o.seed;
  const auto synth = opg::generate_dataset(cfg);
  const bool ordinal = cfg.grader.kind == opg::GraderModel::Kind::kMallows;
  const std::string format = ordinal ? "ordinal" : "cardinal";
  if (!o.format.empty() && o.format != format) {
    throw opg::ValidationError("grader model '" + grader_model + "' produces " + format + " data");
  }
  json truth;
  truth["ranking"] = opg::ranking_to_json(synth.truth_ranking);
  truth["scores"] = json::object();
  for (const auto& [item, s] : synth.truth_scores) truth["scores"][item.str()] = s;
  if (!synth.grader_bias.empty()) {
    truth["grader_bias"] = json::object();
    for (const auto& [g, b] : synth.grader_bias) truth["grader_bias"][g.str()] = b;
  }
  truth["lazy"] = json::array();
  for (const auto& g : synth.data.lazy()) truth["lazy"].push_back(g.str());
  truth["seed"] = o.seed;
  truth["config"] = {{"items", cfg.n_items},
                     {"graders", cfg.n_graders},
                     {"items_per_grader", cfg.items_per_grader},
                     {"grader_model", cfg.grader.to_string()},
                     {"lazy_count", cfg.n_lazy}};
  opg::write_file_atomic(o.output, ordinal ? opg::to_ordinal_json(synth.data) : opg::to_cardinal_csv(synth.data));
  opg::write_file_atomic(o.output + ".truth.json", truth.dump(2) + "\n");
  return 0;
}

opg::Series point(const std::string& name, const opg::MeanStd& v) { return {name, {0.0}, {v.mean}, {v.std}}; }

int run_experiment(const CommonOptions& o, const std::string& kind) {
  const auto cfg = model_config(o);
  const auto data = opg::read_dataset(o.input, infer_format(o));
  opg::ExperimentReport report;
  report.experiment = kind;
  report.method = o.model;
  report.seed = o.seed;
  report.parameters["input"] = o.input;
  report.parameters["iterations"] = std::to_string(o.iterations);
  auto reps_or = [&](int fallback) { return o.reps > 0 ? o.reps : fallback; };

  if (kind == "bootstrap") {
    const int reps = reps_or(1000);
    report.parameters["reps"] = std::to_string(reps);
    report.series.push_back(
        point("ek", opg::bootstrap_ek(data, opg::parse_method(o.model), cfg, load_targets(o.targets), reps, o.seed)));
  } else if (kind == "self-consistency") {
    const int reps = reps_or(20);
    report.parameters["partitions"] = std::to_string(reps);
    report.series.push_back(point("ek", opg::self_consistency(data, opg::parse_method(o.model), cfg, reps, o.seed)));
  } else if (kind == "downsample") {
    const int reps = reps_or(20);
    if (o.levels.empty()) throw opg::ValidationError("--levels is required for downsampling");
    report.parameters["reps"] = std::to_string(reps);
    report.parameters["axis"] = o.axis;
    report.series.push_back(opg::downsample_curve(data, opg::parse_method(o.model), cfg, opg::parse_axis(o.axis),
                                                  o.levels, reps, load_targets(o.targets), o.seed));
  } else if (kind == "lazy-identification") {
    const int reps = reps_or(50);
    const auto method = opg::parse_method(o.model);
    report.parameters["reps"] = std::to_string(reps);
    report.parameters["lazy_count"] = std::to_string(o.lazy_count);
    report.parameters["bottom_k"] = std::to_string(o.bottom_k);
    report.series.push_back(
        point("reliability", opg::lazy_identification(data, method, cfg, o.lazy_count, o.bottom_k, reps, o.seed)));
    report.series.push_back(point(
        "heuristic", opg::lazy_identification_heuristic(data, method, cfg, o.lazy_count, o.bottom_k, reps, o.seed)));
  } else if (kind == "robustness") {
    std::vector<int> counts = o.levels;
    if (counts.empty()) counts.push_back(static_cast<int>(o.lazy_count));
    const auto deltas =
        opg::robustness_delta(data, opg::parse_method(o.model), cfg, counts, load_targets(o.targets), o.seed);
    opg::Series s{"ek_delta", {}, deltas, std::vector<double>(deltas.size(), 0.0)};
    for (int c : counts) s.x.push_back(c);
    report.series.push_back(std::move(s));
  } else if (kind == "timing") {
    const int reps = reps_or(3);
    report.parameters["reps"] = std::to_string(reps);
    for (const auto& row : opg::time_methods(data, parse_methods(o.model), cfg, reps)) {
      report.series.push_back(point(opg::method_name(row.method), row.seconds));
    }
  } else {
    throw opg::ValidationError("unknown experiment '" + kind +
                               "' (bootstrap, self-consistency, downsample, lazy-identification, robustness, timing)");
  }

  for (const auto& s : report.series) {
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      std::printf("%s %g %.6f %.6f\n", s.name.c_str(), s.x[i], s.mean[i], s.std[i]);
    }
  }
  if (!o.output.empty()) opg::write_file_atomic(o.output, opg::report_to_json(report).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordinal peer grading: rank aggregation and grader reliability estimation"};
  app.require_subcommand(1);

  CommonOptions o;
  opg::SynthConfig synth;
  std::string grader_model = "mallows:1.0";
  std::string experiment_kind;

  auto* estimate = app.add_subcommand("estimate", "Fit a model and write an estimate JSON");
  estimate->add_option("--model", o.model, "Model name (mal, mal+g, bt, ...)")->required();
  estimate->add_option("--input", o.input, "Dataset file")->required();
  estimate->add_option("--format", o.format, "ordinal|cardinal (default: by extension)")
      ->check(CLI::IsMember({"ordinal", "cardinal"}));
  estimate->add_option("--output", o.output, "Estimate JSON to write")->required();
  estimate->add_option("--seed", o.seed, "RNG seed");
  estimate->add_option("--iterations", o.iterations, "Alternating rounds for +G models");
  estimate->add_option("--tie-epsilon", o.tie_epsilon, "Score gap treated as a tie");

  auto* evaluate = app.add_subcommand("evaluate", "Score a prediction against target rankings");
  evaluate->add_option("--input", o.input, "Predicted estimate JSON")->required();
  evaluate->add_option("--target", o.targets, "Target ranking JSON (repeatable)")->required();
  evaluate->add_option("--output", o.output, "Optional result JSON");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset and its truth file");
  simulate->add_option("--items", synth.n_items, "Number of items");
  simulate->add_option("--graders", synth.n_graders, "Number of graders");
  simulate->add_option("--items-per-grader", synth.items_per_grader, "Items per grader");
  simulate->add_option("--grader-model", grader_model, "mallows:ETA or normal:ETA[:BIAS_SD][:round]");
  simulate->add_option("--lazy-count", synth.n_lazy, "Lazy graders to append");
  simulate->add_option("--format", o.format, "Expected output format")->check(CLI::IsMember({"ordinal", "cardinal"}));
  simulate->add_option("--seed", o.seed, "RNG seed");
  simulate->add_option("--output", o.output, "Dataset file; truth goes to <output>.truth.json")->required();

  auto* experiment = app.add_subcommand("experiment", "Run an evaluation protocol");
  experiment
      ->add_option("kind", experiment_kind,
                   "bootstrap|self-consistency|downsample|lazy-identification|robustness|timing")
      ->required();
  experiment->add_option("--model", o.model, "Model name (comma-separated list for timing)")->required();
  experiment->add_option("--input", o.input, "Dataset file")->required();
  experiment->add_option("--format", o.format, "ordinal|cardinal")->check(CLI::IsMember({"ordinal", "cardinal"}));
  experiment->add_option("--output", o.output, "Report JSON to write");
  experiment->add_option("--seed", o.seed, "RNG seed");
  experiment->add_option("--iterations", o.iterations, "Alternating rounds for +G models");
  experiment->add_option("--reps", o.reps, "Repetitions (default depends on the experiment)");
  experiment->add_option("--target", o.targets, "Target ranking JSON (repeatable)");
  experiment->add_option("--lazy-count", o.lazy_count, "Lazy graders to add");
  experiment->add_option("--bottom-k", o.bottom_k, "Size of the suspect set (default 12.5% of graders)");
  experiment->add_option("--axis", o.axis, "reviewers|items_per_reviewer");
  experiment->add_option("--levels", o.levels, "Downsampling levels or lazy counts")->delimiter(',');
  experiment->add_option("--tie-epsilon", o.tie_epsilon, "Score gap treated as a tie");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (estimate->parsed()) return run_estimate(o);
    if (evaluate->parsed()) return run_evaluate(o);
    if (simulate->parsed()) return run_simulate(o, synth, grader_model);
    if (experiment->parsed()) return run_experiment(o, experiment_kind);
  } catch (const opg::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
