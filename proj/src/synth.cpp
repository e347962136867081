#include "opg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace opg {
namespace {

std::string padded(std::size_t index, std::size_t count) {
  const std::size_t width = std::to_string(std::max<std::size_t>(count, 1) - 1).size();
  std::string digits = std::to_string(index);
  return std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

// Least-loaded balanced design over `items`.
std::vector<std::vector<std::size_t>> balanced_design(std::size_t n_items, std::size_t n_graders, std::size_t k,
                                                      std::mt19937_64& rng) {
  std::vector<std::size_t> load(n_items, 0);
  std::vector<std::size_t> order(n_items);
  std::vector<std::vector<std::size_t>> design(n_graders);
  for (auto& picks : design) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return load[a] < load[b]; });
    picks.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(picks.begin(), picks.end());
    for (std::size_t i : picks) ++load[i];
  }
  return design;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

GraderModel GraderModel::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string::npos ? std::string::npos : colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) {
      throw ValidationError("bad number '" + text + "' in grader model '" + spec + "'");
    }
    return v;
  };
  GraderModel m;
  if (parts[0] == "mallows" && parts.size() == 2) {
    m.kind = Kind::kMallows;
    m.eta = number(parts[1]);
  } else if (parts[0] == "normal" && parts.size() >= 2 && parts.size() <= 4) {
    m.kind = Kind::kCardinalNormal;
    if (parts.back() == "round") {
      m.round_grades = true;
      parts.pop_back();
    }
    if (parts.size() < 2) throw ValidationError("grader model '" + spec + "' lacks eta");
    m.eta = number(parts[1]);
    if (parts.size() == 3) m.bias_sd = number(parts[2]);
    if (parts.size() == 4) throw ValidationError("grader model '" + spec + "' has too many fields");
  } else {
    throw ValidationError("grader model must be mallows:ETA or normal:ETA[:BIAS_SD][:round], got '" + spec + "'");
  }
  if (!(m.eta > 0.0)) throw ValidationError("grader model eta must be > 0");
  if (!(m.bias_sd >= 0.0)) throw ValidationError("grader bias sd must be >= 0");
  return m;
}

std::string GraderModel::to_string() const {
  auto fmt = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
  };
  if (kind == Kind::kMallows) return "mallows:" + fmt(eta);
  return "normal:" + fmt(eta) + (bias_sd > 0.0 ? ":" + fmt(bias_sd) : "") + (round_grades ? ":round" : "");
}

void SynthConfig::validate() const {
  if (n_items == 0 || n_graders == 0) throw ValidationError("need at least one item and one grader");
  if (items_per_grader == 0 || items_per_grader > n_items) {
    throw ValidationError("items per grader must be in [1, n_items]");
  }
  if (full_coverage && n_graders * items_per_grader < n_items) {
    throw ValidationError("design cannot cover every item: n_graders * items_per_grader < n_items");
  }
  if (!(truth.variance > 0.0)) throw ValidationError("truth variance must be > 0");
  if (!(grader.eta > 0.0)) throw ValidationError("grader eta must be > 0");
}

ItemId synth_item_id(std::size_t index, std::size_t count) { return ItemId("d" + padded(index, count)); }

GraderId synth_grader_id(std::size_t index, std::size_t count) { return GraderId("g" + padded(index, count)); }

std::map<GraderId, std::set<ItemId>> assign_reviewers(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(derived_seed(cfg.seed, 1));
  const auto design = balanced_design(cfg.n_items, cfg.n_graders, cfg.items_per_grader, rng);
  std::map<GraderId, std::set<ItemId>> out;
  for (std::size_t g = 0; g < design.size(); ++g) {
    auto& items = out[synth_grader_id(g, cfg.n_graders)];
    for (std::size_t i : design[g]) items.insert(synth_item_id(i, cfg.n_items));
  }
  return out;
}

WeakRanking sample_mallows_feedback(const WeakRanking& truth, const std::set<ItemId>& subset, double eta,
                                    std::mt19937_64& rng) {
  if (!(eta > 0.0)) throw ValidationError("Mallows sampling needs eta > 0");
  if (!truth.is_total()) throw ValidationError("Mallows sampling needs a strict center");
  std::vector<ItemId> center;
  for (const auto& item : truth.items()) {
    if (subset.contains(item)) center.push_back(item);
  }
  if (center.size() != subset.size()) throw ValidationError("subset contains items outside the center ranking");

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<ItemId> out;
  out.reserve(center.size());
  std::vector<double> weight;
  for (std::size_t i = 0; i < center.size(); ++i) {
    // Inserting at slot j (0 = top) inverts the i - j items it jumps over.
    weight.resize(i + 1);
    double total = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      weight[j] = std::exp(-eta * static_cast<double>(i - j));
      total += weight[j];
    }
    double u = unif(rng) * total;
    std::size_t slot = i;
    for (std::size_t j = 0; j <= i; ++j) {
      if (u < weight[j]) {
        slot = j;
        break;
      }
      u -= weight[j];
    }
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(slot), center[i]);
  }
  return WeakRanking::total(out);
}

WeakRanking sample_mallows_feedback(const WeakRanking& truth, const std::set<ItemId>& subset, double eta,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_mallows_feedback(truth, subset, eta, rng);
}

SyntheticData generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(derived_seed(cfg.seed, 2));
  SyntheticData out;
  std::vector<ItemId> items;
  std::normal_distribution<double> truth_dist(cfg.truth.mean, std::sqrt(cfg.truth.variance));
  for (std::size_t i = 0; i < cfg.n_items; ++i) {
    items.push_back(synth_item_id(i, cfg.n_items));
    out.truth_scores.emplace(items.back(), truth_dist(rng));
  }
  out.truth_ranking = ranking_from_scores(out.truth_scores, 0.0);

  std::vector<GraderId> graders;
  std::vector<GraderFeedback> feedback;
  const auto design = assign_reviewers(cfg);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  for (const auto& [grader, subset] : design) {
    graders.push_back(grader);
    if (cfg.grader.kind == GraderModel::Kind::kMallows) {
      feedback.push_back(
          GraderFeedback::from_ordinal(grader, sample_mallows_feedback(out.truth_ranking, subset, cfg.grader.eta, rng)));
      continue;
    }
    const double bias = cfg.grader.bias_sd * std_normal(rng);
    out.grader_bias.emplace(grader, bias);
    const double noise_sd = 1.0 / std::sqrt(cfg.grader.eta);
    std::map<ItemId, double> grades;
    for (const auto& item : subset) {
      double y = 8.0 + 1.3 * (out.truth_scores.at(item) + bias + noise_sd * std_normal(rng));
      if (cfg.grader.round_grades) y = std::round(y);
      grades.emplace(item, std::clamp(y, 1.0, 10.0));
    }
    feedback.push_back(GraderFeedback::from_cardinal(grader, std::move(grades)));
  }
  out.data = Dataset(std::move(items), std::move(graders), std::move(feedback));
  if (cfg.n_lazy > 0) out.data = add_lazy_graders(out.data, cfg.n_lazy, derived_seed(cfg.seed, 3));
  return out;
}

Dataset add_lazy_graders(const Dataset& data, std::size_t n, std::uint64_t seed) {
  if (data.empty()) throw ValidationError("cannot add lazy graders to an empty dataset");
  if (n == 0) return data;

  std::map<std::size_t, std::size_t> size_counts;
  for (const auto& fb : data.feedback()) ++size_counts[fb.items.size()];
  std::size_t k = 0;
  std::size_t best = 0;
  for (const auto& [size, count] : size_counts) {
    if (count >= best) {
      best = count;
      k = size;
    }
  }
  k = std::min(k, data.items().size());

  const bool cardinal = data.all_cardinal();
  double mean = 0.0;
  double var = 0.0;
  // Integer-scale data gets integer lazy grades within the observed range.
  bool integral = cardinal;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (cardinal) {
    for (const auto& fb : data.feedback()) {
      for (const auto& [item, y] : *fb.cardinal) {
        integral = integral && y == std::round(y);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
      }
    }
    std::size_t count = 0;
    for (const auto& fb : data.feedback()) {
      for (const auto& [item, y] : *fb.cardinal) {
        mean += y;
        ++count;
      }
    }
    mean /= static_cast<double>(count);
    for (const auto& fb : data.feedback()) {
      for (const auto& [item, y] : *fb.cardinal) var += (y - mean) * (y - mean);
    }
    var /= static_cast<double>(count);
  }

  std::mt19937_64 rng(seed);
  const auto design = balanced_design(data.items().size(), n, k, rng);
  std::vector<GraderId> graders = data.graders();
  std::vector<GraderFeedback> feedback = data.feedback();
  std::set<GraderId> lazy = data.lazy();
  const std::set<GraderId> taken(graders.begin(), graders.end());
  std::normal_distribution<double> grade_dist(mean, std::sqrt(var));
  for (std::size_t l = 0; l < n; ++l) {
    std::string name = "lazy" + padded(l, n);
    while (taken.contains(GraderId(name))) name += "_";
    GraderId id(name);
    graders.push_back(id);
    lazy.insert(id);
    if (cardinal) {
      std::map<ItemId, double> grades;
      for (std::size_t i : design[l]) {
        const double y = grade_dist(rng);
        grades.emplace(data.items()[i], integral ? std::clamp(std::round(y), lo, hi) : y);
      }
      feedback.push_back(GraderFeedback::from_cardinal(id, std::move(grades)));
    } else {
      std::vector<ItemId> order;
      for (std::size_t i : design[l]) order.push_back(data.items()[i]);
      std::shuffle(order.begin(), order.end(), rng);
      feedback.push_back(GraderFeedback::from_ordinal(id, WeakRanking::total(order)));
    }
  }
  return Dataset(data.items(), std::move(graders), std::move(feedback), std::move(lazy));
}

}  // namespace opg
