#pragma once

#include <vector>

#include "opg/ranking.hpp"

inline opg::ItemId I(const char* s) { return opg::ItemId(s); }

// W({{"a"}, {"b", "c"}}) builds [a] > [b = c].
inline opg::WeakRanking W(std::vector<std::vector<const char*>> groups) {
  std::vector<std::vector<opg::ItemId>> g;
  for (const auto& grp : groups) {
    g.emplace_back();
    for (const char* s : grp) g.back().emplace_back(s);
  }
  return opg::WeakRanking(g);
}
