#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "belt/env.hpp"
#include "belt/policy.hpp"
#include "belt/search.hpp"

namespace belt {

// Fixed-precision formatting so emitted reports are byte-stable.
std::string fmt(double v, int precision = 6);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);  // throws on arity mismatch
  const std::string& str() const { return text_; }
  const std::vector<std::string>& header() const { return header_; }
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::string text_;
};

void ensure_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

nlohmann::json state_to_json(const State& s);
State state_from_json(const nlohmann::json& j);

nlohmann::json env_to_json(const EnvConfig& c);
EnvConfig env_from_json(const nlohmann::json& j);
nlohmann::json policy_to_json(const PolicyConfig& c);
PolicyConfig policy_from_json(const nlohmann::json& j);

// A planned solution: the task (goal) sequence with per-edge horizons.
struct PlanFile {
  std::string planner;
  std::string model;
  std::string chain;
  State x_init;
  bool solved = false;
  int cost = 0;
  std::vector<Task> tasks;
  std::vector<int> horizons;
};

void save_plan(const PlanFile& plan, const std::string& path);
PlanFile load_plan(const std::string& path);

// Line-delimited tree/iteration log for post-hoc analysis.
Csv iteration_log_csv(const std::vector<IterationRecord>& log);

}  // namespace belt
