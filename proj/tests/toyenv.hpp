#pragma once

// Crafted environments where exactly one candidate improves the buggy rank.
// Each pool has two statements per method, a failing test covering every
// statement, one golden candidate covering everything except the buggy
// method (adding it pins that method at rank 1), and inert fillers that
// cover nothing and never move the ranking. Rotating the buggy method gives
// a family of such pools for training.

#include <string>
#include <vector>

#include "rlfdc/dataset.hpp"

namespace golden {

inline constexpr rlfdc::TestId kToyGoldenCandidate = 1;

inline rlfdc::Dataset toy_environment(int fillers = 10, int methods = 5, int buggy_method = 2) {
  using namespace rlfdc;
  Dataset d;
  for (int m = 0; m < methods; ++m) d.methods.push_back("m" + std::to_string(m));
  const int n = methods * 2;
  for (int e = 0; e < n; ++e) d.elements.push_back(Element{e / 2, "s" + std::to_string(e)});

  const std::string all(static_cast<std::size_t>(n), '1');
  const std::string nothing(static_cast<std::size_t>(n), '0');
  std::string except_buggy = all;
  except_buggy[static_cast<std::size_t>(2 * buggy_method)] = '0';
  except_buggy[static_cast<std::size_t>(2 * buggy_method + 1)] = '0';

  d.tests.push_back({"t_fail", bits_from_string(all), Outcome::Fail});
  d.tests.push_back({"t_gold", bits_from_string(except_buggy), Outcome::Pass});
  for (int i = 0; i < fillers; ++i)
    d.tests.push_back({"t_fill" + std::to_string(i), bits_from_string(nothing), Outcome::Pass});
  d.faults = {2 * buggy_method};
  d.initial_failing = {0};
  d.validate();
  return d;
}

inline std::vector<rlfdc::Dataset> toy_family(int variants = 4, int fillers = 10) {
  std::vector<rlfdc::Dataset> family;
  for (int v = 0; v < variants; ++v)
    family.push_back(toy_environment(fillers, variants, v));
  return family;
}

}  // namespace golden
