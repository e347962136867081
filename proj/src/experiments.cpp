#include "opg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "opg/metrics.hpp"
#include "opg/synth.hpp"

namespace opg {
namespace {

Dataset with_feedback(const Dataset& data, std::vector<GraderFeedback> feedback) {
  std::vector<GraderId> graders;
  for (const auto& fb : feedback) graders.push_back(fb.grader);
  std::set<GraderId> lazy;
  for (const auto& g : graders) {
    if (data.lazy().contains(g)) lazy.insert(g);
  }
  return Dataset(data.items(), std::move(graders), std::move(feedback), std::move(lazy));
}

void require_feedback(const Dataset& data) {
  if (data.empty()) throw ValidationError("experiment needs a non-empty dataset");
}

// Per-grader ranking restricted to `keep` items, applied to both views.
GraderFeedback restrict_feedback(const GraderFeedback& fb, const std::set<ItemId>& keep) {
  GraderFeedback out = fb;
  out.items.clear();
  for (const auto& item : fb.items) {
    if (keep.contains(item)) out.items.push_back(item);
  }
  if (fb.ordinal) out.ordinal = fb.ordinal->restricted_to(keep);
  if (fb.cardinal) {
    std::map<ItemId, double> c;
    for (const auto& [item, y] : *fb.cardinal) {
      if (keep.contains(item)) c.emplace(item, y);
    }
    out.cardinal = std::move(c);
  }
  return out;
}

// Fraction of `lazy` among the k most suspect graders; ties at the cut
// share the remaining slots.
double bottom_k_rate(const std::vector<std::pair<GraderId, double>>& suspicion, const std::set<GraderId>& lazy,
                     std::size_t k) {
  std::vector<double> values;
  for (const auto& [g, v] : suspicion) values.push_back(v);
  std::sort(values.begin(), values.end(), std::greater<>());
  const double cut = values[k - 1];
  std::size_t above = 0;
  std::size_t at = 0;
  for (double v : values) {
    if (v > cut) ++above;
    if (v == cut) ++at;
  }
  const double tie_credit = static_cast<double>(k - above) / static_cast<double>(at);
  double hits = 0.0;
  for (const auto& [g, v] : suspicion) {
    if (!lazy.contains(g)) continue;
    if (v > cut) hits += 1.0;
    if (v == cut) hits += tie_credit;
  }
  return hits / static_cast<double>(lazy.size());
}

using SuspicionFn = std::function<std::vector<std::pair<GraderId, double>>(const Dataset&)>;

MeanStd identification(const Dataset& data, std::size_t n_lazy, std::size_t bottom_k, int reps,
                       std::uint64_t seed, const SuspicionFn& suspicion) {
  require_feedback(data);
  if (reps < 1) throw ValidationError("reps must be >= 1");
  if (n_lazy == 0 && data.lazy().empty()) {
    throw ValidationError("lazy identification needs lazy graders");
  }
  const std::size_t total = data.feedback().size() + n_lazy;
  const std::size_t k = bottom_k > 0 ? bottom_k : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.125 * static_cast<double>(total))));
  if (k > total) throw ValidationError("bottom_k exceeds the number of graders");
  return mean_std(parallel_reps(static_cast<std::size_t>(reps), [&](std::size_t r) {
    const Dataset d = n_lazy > 0 ? add_lazy_graders(data, n_lazy, seed + r) : data;
    return bottom_k_rate(suspicion(d), d.lazy(), k);
  }));
}

}  // namespace

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::size_t experiment_threads() {
  if (const char* env = std::getenv("OPG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> parallel_reps(std::size_t n, const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::min(experiment_threads(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::mutex m;
  std::size_t next = 0;
  auto work = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(m);
        if (next >= n) return;
        i = next++;
      }
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

MeanStd bootstrap_ek(const Dataset& data, Method method, const ModelConfig& cfg,
                     const std::vector<WeakRanking>& targets, int reps, std::uint64_t seed) {
  require_feedback(data);
  if (reps < 2) throw ValidationError("bootstrap needs reps >= 2");
  const auto& fbs = data.feedback();
  return mean_std(parallel_reps(static_cast<std::size_t>(reps), [&](std::size_t r) {
    std::mt19937_64 rng(seed + r);
    std::uniform_int_distribution<std::size_t> pick(0, fbs.size() - 1);
    std::vector<GraderFeedback> sample;
    for (std::size_t j = 0; j < fbs.size(); ++j) {
      GraderFeedback fb = fbs[pick(rng)];
      fb.grader = GraderId(fb.grader.str() + "#" + std::to_string(j));
      sample.push_back(std::move(fb));
    }
    return ek_error(targets, estimate(with_feedback(data, std::move(sample)), method, cfg).ranking);
  }));
}

MeanStd self_consistency(const Dataset& data, Method method, const ModelConfig& cfg, int partitions,
                         std::uint64_t seed) {
  if (data.feedback().size() < 2) throw ValidationError("self-consistency needs at least two graders");
  if (partitions < 1) throw ValidationError("partitions must be >= 1");
  return mean_std(parallel_reps(static_cast<std::size_t>(partitions), [&](std::size_t p) {
    std::mt19937_64 rng(seed + p);
    auto fbs = data.feedback();
    std::shuffle(fbs.begin(), fbs.end(), rng);
    const auto half = static_cast<std::ptrdiff_t>(fbs.size() / 2);
    std::vector<GraderFeedback> a(fbs.begin(), fbs.begin() + half);
    std::vector<GraderFeedback> b(fbs.begin() + half, fbs.end());
    const auto ra = break_ties(estimate(with_feedback(data, std::move(a)), method, cfg).ranking, rng);
    const auto rb = break_ties(estimate(with_feedback(data, std::move(b)), method, cfg).ranking, rng);
    return ek_error({ra}, rb);
  }));
}

DownsampleAxis parse_axis(const std::string& name) {
  if (name == "reviewers") return DownsampleAxis::kReviewers;
  if (name == "items_per_reviewer" || name == "items-per-reviewer") return DownsampleAxis::kItemsPerReviewer;
  throw ValidationError("axis must be 'reviewers' or 'items_per_reviewer'");
}

std::string axis_name(DownsampleAxis axis) {
  return axis == DownsampleAxis::kReviewers ? "reviewers" : "items_per_reviewer";
}

Series downsample_curve(const Dataset& data, Method method, const ModelConfig& cfg, DownsampleAxis axis,
                        const std::vector<int>& levels, int reps, const std::vector<WeakRanking>& targets,
                        std::uint64_t seed) {
  require_feedback(data);
  if (reps < 1) throw ValidationError("reps must be >= 1");
  std::size_t max_level = data.feedback().size();
  if (axis == DownsampleAxis::kItemsPerReviewer) {
    max_level = 0;
    for (const auto& fb : data.feedback()) max_level = std::max(max_level, fb.items.size());
  }
  Series out;
  out.name = axis_name(axis);
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const int level = levels[li];
    if (level < 1 || static_cast<std::size_t>(level) > max_level) {
      throw ValidationError("downsampling level " + std::to_string(level) + " outside [1, " +
                            std::to_string(max_level) + "]");
    }
    const auto stats = mean_std(parallel_reps(static_cast<std::size_t>(reps), [&](std::size_t r) {
      std::mt19937_64 rng(seed + li * static_cast<std::size_t>(reps) + r);
      auto fbs = data.feedback();
      if (axis == DownsampleAxis::kReviewers) {
        std::shuffle(fbs.begin(), fbs.end(), rng);
        fbs.erase(fbs.begin() + level, fbs.end());
        std::sort(fbs.begin(), fbs.end(), [](const auto& a, const auto& b) { return a.grader < b.grader; });
      } else {
        for (auto& fb : fbs) {
          if (fb.items.size() <= static_cast<std::size_t>(level)) continue;
          auto items = fb.items;
          std::shuffle(items.begin(), items.end(), rng);
          fb = restrict_feedback(fb, std::set<ItemId>(items.begin(), items.begin() + level));
        }
      }
      return ek_error(targets, estimate(with_feedback(data, std::move(fbs)), method, cfg).ranking);
    }));
    out.x.push_back(level);
    out.mean.push_back(stats.mean);
    out.std.push_back(stats.std);
  }
  return out;
}

MeanStd lazy_identification(const Dataset& data, Method method, const ModelConfig& cfg, std::size_t n_lazy,
                            std::size_t bottom_k, int reps, std::uint64_t seed) {
  if (!estimates_reliability(method)) {
    throw ValidationError("model '" + method_name(method) + "' does not estimate grader reliabilities");
  }
  return identification(data, n_lazy, bottom_k, reps, seed, [&](const Dataset& d) {
    const auto est = estimate(d, method, cfg);
    std::vector<std::pair<GraderId, double>> out;
    for (const auto& fb : d.feedback()) out.emplace_back(fb.grader, -est.reliabilities->at(fb.grader));
    return out;
  });
}

MeanStd lazy_identification_heuristic(const Dataset& data, Method method, const ModelConfig& cfg,
                                      std::size_t n_lazy, std::size_t bottom_k, int reps, std::uint64_t seed) {
  const Method base = without_reliability(method);
  return identification(data, n_lazy, bottom_k, reps, seed, [&](const Dataset& d) {
    const auto est = estimate(d, base, cfg);
    std::vector<std::pair<GraderId, double>> out;
    for (const auto& fb : d.feedback()) {
      if (!fb.ordinal) throw ValidationError("heuristic needs ordinal feedback");
      const auto target = est.ranking.restricted_to(std::set<ItemId>(fb.items.begin(), fb.items.end()));
      const std::size_t pairs = target.strict_pair_count();
      out.emplace_back(fb.grader, pairs > 0 ? tau_kt(target, *fb.ordinal) / static_cast<double>(pairs) : 0.5);
    }
    return out;
  });
}

std::vector<double> robustness_delta(const Dataset& data, Method method, const ModelConfig& cfg,
                                     const std::vector<int>& lazy_counts, const std::vector<WeakRanking>& targets,
                                     std::uint64_t seed) {
  require_feedback(data);
  for (int c : lazy_counts) {
    if (c < 0) throw ValidationError("lazy counts must be >= 0");
  }
  const double clean = ek_error(targets, estimate(data, method, cfg).ranking);
  return parallel_reps(lazy_counts.size(), [&](std::size_t i) {
    if (lazy_counts[i] == 0) return 0.0;
    const auto d = add_lazy_graders(data, static_cast<std::size_t>(lazy_counts[i]), seed + i);
    return ek_error(targets, estimate(d, method, cfg).ranking) - clean;
  });
}

std::vector<TimingRow> time_methods(const Dataset& data, const std::vector<Method>& methods, const ModelConfig& cfg,
                                    int reps) {
  require_feedback(data);
  if (reps < 1) throw ValidationError("reps must be >= 1");
  std::vector<TimingRow> rows;
  for (Method m : methods) {
    std::vector<double> secs;
    for (int r = 0; r < reps; ++r) {
      const auto start = std::chrono::steady_clock::now();
      estimate(data, m, cfg);
      secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    rows.push_back({m, mean_std(secs)});
  }
  return rows;
}

}  // namespace opg
