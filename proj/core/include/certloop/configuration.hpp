#ifndef CERTLOOP_CONFIGURATION_HPP
#define CERTLOOP_CONFIGURATION_HPP

#include <string>
#include <utility>
#include <vector>

namespace certloop {

/// Application configuration vector as an ordered list of named fields with
/// canonical string values (e.g. x1=1, sp=3.2 or MarketWatch=MW0).  Equality
/// is field-wise and exact; every layer above (planning, logging, argument
/// contexts) works off this one representation.
struct Configuration {
  std::vector<std::pair<std::string, std::string>> fields;

  const std::string* get(const std::string& name) const {
    for (const auto& [k, v] : fields)
      if (k == name) return &v;
    return nullptr;
  }

  void set(const std::string& name, std::string value) {
    for (auto& [k, v] : fields) {
      if (k == name) {
        v = std::move(value);
        return;
      }
    }
    fields.emplace_back(name, std::move(value));
  }

  /// "x1=0 x2=1 x3=1 sp=2.8"
  std::string summary() const {
    std::string out;
    for (const auto& [k, v] : fields) {
      if (!out.empty()) out += ' ';
      out += k;
      out += '=';
      out += v;
    }
    return out;
  }

  bool operator==(const Configuration&) const = default;
};

}  // namespace certloop

#endif
