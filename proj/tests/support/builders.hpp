#ifndef CERTLOOP_TESTS_BUILDERS_HPP
#define CERTLOOP_TESTS_BUILDERS_HPP

// Compact builders for small hand-specified chains used across the tests.

#include <initializer_list>
#include <string>
#include <tuple>
#include <vector>

#include "certloop/markov.hpp"
#include "doctest.h"

namespace certloop::test {

struct EdgeSpec {
  std::string from, to;
  double weight;
};

struct RewardSpec {
  std::string name;
  std::vector<std::pair<std::string, double>> states;
  std::vector<std::tuple<std::string, std::string, double>> transitions;
};

/// States are declared as "name" or "name:label1:label2".
inline MarkovModel chain(ModelKind kind, std::initializer_list<const char*> states,
                         std::initializer_list<EdgeSpec> edges,
                         std::initializer_list<RewardSpec> rewards = {},
                         const std::string& initial = "") {
  MarkovModel m;
  m.kind = kind;
  for (const char* s : states) {
    std::string text = s;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto pos = text.find(':', start);
      parts.push_back(text.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    m.state_names.push_back(parts[0]);
    m.state_labels.emplace_back(parts.begin() + 1, parts.end());
  }
  auto index = [&m](const std::string& name) {
    auto idx = m.index_of(name);
    REQUIRE_MESSAGE(idx.has_value(), "unknown state " << name);
    return *idx;
  };
  m.initial = initial.empty() ? 0 : index(initial);
  for (const auto& e : edges) m.transitions.push_back({index(e.from), index(e.to), e.weight});
  for (const auto& r : rewards) {
    RewardStructure rs;
    rs.state_rewards.assign(m.state_names.size(), 0.0);
    for (const auto& [s, v] : r.states) rs.state_rewards[static_cast<std::size_t>(index(s))] = v;
    for (const auto& [a, b, v] : r.transitions) rs.transition_rewards[{index(a), index(b)}] = v;
    m.rewards.emplace(r.name, std::move(rs));
  }
  return m;
}

}  // namespace certloop::test

#endif
