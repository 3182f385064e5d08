#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace sumprod {

using json = nlohmann::ordered_json;

/// One asserted inequality or identity: lhs <relation> rhs.
struct Check {
  std::string name;
  json lhs;
  json rhs;
  std::string relation;  // "<=", "==", ">="
  bool passed = false;
  bool asserted = true;  // informational checks never fail a run
};

/// Serializable record of one experiment: echoed configuration, computed
/// quantities, and checks with verdicts.
class ReportDocument {
 public:
  static constexpr int kSchema = 1;

  explicit ReportDocument(std::string kind = {}) : kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

  json& config() { return config_; }
  const json& config() const { return config_; }

  void set(const std::string& name, json value) { quantities_[name] = std::move(value); }
  const json& get(const std::string& name) const { return quantities_.at(name); }
  bool has(const std::string& name) const { return quantities_.contains(name); }
  const json& quantities() const { return quantities_; }

  template <typename L, typename R>
  bool check_le(const std::string& name, const L& lhs, const R& rhs, bool asserted = true) {
    return add(name, lhs, rhs, "<=", lhs <= rhs, asserted);
  }
  template <typename L, typename R>
  bool check_eq(const std::string& name, const L& lhs, const R& rhs, bool asserted = true) {
    return add(name, lhs, rhs, "==", lhs == rhs, asserted);
  }

  bool add(const std::string& name, json lhs, json rhs, std::string relation, bool passed,
           bool asserted = true) {
    checks_.push_back({name, std::move(lhs), std::move(rhs), std::move(relation), passed, asserted});
    return passed;
  }

  const std::vector<Check>& checks() const { return checks_; }

  const Check* find_check(const std::string& name) const {
    for (const auto& c : checks_) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  bool all_passed() const {
    for (const auto& c : checks_) {
      if (c.asserted && !c.passed) return false;
    }
    return true;
  }

  /// Nested report, kept in order.
  void add_section(const std::string& name, const ReportDocument& sub) {
    sections_.emplace_back(name, sub.to_json(false));
    for (const auto& c : sub.checks()) {
      Check copy = c;
      copy.name = name + "/" + c.name;
      checks_.push_back(std::move(copy));
    }
  }

  void set_wall_time(double seconds) { wall_time_ = seconds; }

  json to_json(bool with_schema = true) const {
    json out;
    if (with_schema) out["schema"] = kSchema;
    if (!kind_.empty()) out["kind"] = kind_;
    if (!config_.is_null()) out["config"] = config_;
    out["quantities"] = quantities_.is_null() ? json::object() : quantities_;
    json checks = json::array();
    for (const auto& c : checks_) {
      if (c.name.find('/') != std::string::npos && !with_schema) continue;
      checks.push_back({{"name", c.name},
                        {"lhs", c.lhs},
                        {"relation", c.relation},
                        {"rhs", c.rhs},
                        {"verdict", c.passed ? "pass" : "fail"},
                        {"asserted", c.asserted}});
    }
    out["checks"] = std::move(checks);
    if (!sections_.empty()) {
      json sections = json::object();
      for (const auto& [name, body] : sections_) sections[name] = body;
      out["sections"] = std::move(sections);
    }
    if (with_schema) {
      out["all_passed"] = all_passed();
      if (wall_time_ >= 0) out["provenance"] = {{"library", "sumprod"}, {"version", "1.0.0"}, {"wall_time_s", wall_time_}};
    }
    return out;
  }

 private:
  std::string kind_;
  json config_;
  json quantities_ = json::object();
  std::vector<Check> checks_;
  std::vector<std::pair<std::string, json>> sections_;
  double wall_time_ = -1;
};

}  // namespace sumprod
