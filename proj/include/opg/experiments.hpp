#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "opg/config.hpp"
#include "opg/dataset.hpp"
#include "opg/methods.hpp"

namespace opg {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_std(const std::vector<double>& values);

// A named curve or table column: y = mean +- std at each x. Scalar results
// use a single point.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;

  friend bool operator==(const Series&, const Series&) = default;
};

struct ExperimentReport {
  std::string experiment;
  std::string method;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> parameters;
  std::vector<Series> series;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

// Worker count for repetitions: OPG_THREADS if set (>= 1), else the
// hardware concurrency.
std::size_t experiment_threads();

// Runs fn(0..n-1), possibly concurrently; results come back in index order.
std::vector<double> parallel_reps(std::size_t n, const std::function<double(std::size_t)>& fn);

// Graders resampled with replacement (copies get distinct ids), refit, E_K.
MeanStd bootstrap_ek(const Dataset& data, Method method, const ModelConfig& cfg,
                     const std::vector<WeakRanking>& targets, int reps, std::uint64_t seed);

// Random half splits of the graders; each half is fitted, ties broken at
// random, and one ranking scored against the other.
MeanStd self_consistency(const Dataset& data, Method method, const ModelConfig& cfg, int partitions,
                         std::uint64_t seed);

enum class DownsampleAxis { kReviewers, kItemsPerReviewer };

DownsampleAxis parse_axis(const std::string& name);
std::string axis_name(DownsampleAxis axis);

// For each level (a count of reviewers, or of items kept per reviewer),
// `reps` random subsamples are fitted and scored.
Series downsample_curve(const Dataset& data, Method method, const ModelConfig& cfg, DownsampleAxis axis,
                        const std::vector<int>& levels, int reps, const std::vector<WeakRanking>& targets,
                        std::uint64_t seed);

// Share of lazy graders that land among the `bottom_k` graders by estimated
// reliability (bottom_k = 0 means 12.5% of all graders). With n_lazy > 0
// every repetition appends fresh lazy graders to `data`; otherwise the
// dataset's own lazy labels are used. Ties at the cut earn fractional
// credit.
MeanStd lazy_identification(const Dataset& data, Method method, const ModelConfig& cfg, std::size_t n_lazy,
                            std::size_t bottom_k, int reps, std::uint64_t seed);

// Same protocol, ranking graders by tau_kt(estimate restricted to D_g,
// feedback) / strict pairs, using the estimator without reliabilities.
MeanStd lazy_identification_heuristic(const Dataset& data, Method method, const ModelConfig& cfg,
                                      std::size_t n_lazy, std::size_t bottom_k, int reps, std::uint64_t seed);

// E_K(with lazy) - E_K(without) for each count of added lazy graders.
std::vector<double> robustness_delta(const Dataset& data, Method method, const ModelConfig& cfg,
                                     const std::vector<int>& lazy_counts, const std::vector<WeakRanking>& targets,
                                     std::uint64_t seed);

struct TimingRow {
  Method method;
  MeanStd seconds;
};

std::vector<TimingRow> time_methods(const Dataset& data, const std::vector<Method>& methods, const ModelConfig& cfg,
                                    int reps);

}  // namespace opg
