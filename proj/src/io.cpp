#include "belt/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace belt {

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

Csv::Csv(std::vector<std::string> header) : header_(std::move(header)) {
  for (size_t i = 0; i < header_.size(); ++i) {
    if (i) text_ += ',';
    text_ += header_[i];
  }
  text_ += '\n';
}

void Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size())
    throw std::invalid_argument("Csv: row arity does not match header");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

void Csv::write_file(const std::string& path) const { write_text_file(path, text_); }

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json state_to_json(const State& s) {
  return nlohmann::json{{"effector", {s.effector.x(), s.effector.y()}},
                        {"gripper_closed", s.gripper_closed},
                        {"drawer_ext", s.drawer_ext},
                        {"slider_pos", s.slider_pos},
                        {"block", {s.block.x(), s.block.y()}},
                        {"block_angle", s.block_angle},
                        {"block_zone", static_cast<int>(s.block_zone)},
                        {"lights", {s.lights[0], s.lights[1], s.lights[2]}},
                        {"t", s.t}};
}

State state_from_json(const nlohmann::json& j) {
  State s;
  s.effector = Vec2(j["effector"][0], j["effector"][1]);
  s.gripper_closed = j["gripper_closed"];
  s.drawer_ext = j["drawer_ext"];
  s.slider_pos = j["slider_pos"];
  s.block = Vec2(j["block"][0], j["block"][1]);
  s.block_angle = j["block_angle"];
  s.block_zone = static_cast<Zone>(j["block_zone"].get<int>());
  for (int i = 0; i < 3; ++i) s.lights[i] = j["lights"][i];
  s.t = j["t"];
  return s;
}

nlohmann::json env_to_json(const EnvConfig& c) {
  return nlohmann::json{
      {"workspace_lo", c.workspace_lo},
      {"workspace_hi", c.workspace_hi},
      {"max_step", c.max_step},
      {"max_dtheta", c.max_dtheta},
      {"interaction_radius", c.interaction_radius},
      {"press_radius", c.press_radius},
      {"open_threshold", c.open_threshold},
      {"closed_threshold", c.closed_threshold},
      {"drawer_handle_base", {c.drawer_handle_base.x(), c.drawer_handle_base.y()}},
      {"drawer_axis", {c.drawer_axis.x(), c.drawer_axis.y()}},
      {"drawer_travel", c.drawer_travel},
      {"drawer_anchor_offset", {c.drawer_anchor_offset.x(), c.drawer_anchor_offset.y()}},
      {"slider_handle_base", {c.slider_handle_base.x(), c.slider_handle_base.y()}},
      {"slider_axis", {c.slider_axis.x(), c.slider_axis.y()}},
      {"slider_travel", c.slider_travel},
      {"shelf_lo", {c.shelf_lo.x(), c.shelf_lo.y()}},
      {"shelf_hi", {c.shelf_hi.x(), c.shelf_hi.y()}},
      {"shelf_anchor", {c.shelf_anchor.x(), c.shelf_anchor.y()}},
      {"buttons",
       {{c.buttons[0].x(), c.buttons[0].y()},
        {c.buttons[1].x(), c.buttons[1].y()},
        {c.buttons[2].x(), c.buttons[2].y()}}},
      {"capture_radius", c.capture_radius},
      {"wrapped_angle", c.wrapped_angle},
      {"seed", c.seed}};
}

namespace {
Vec2 vec2_of(const nlohmann::json& j) { return Vec2(j[0], j[1]); }

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
void maybe_vec(const nlohmann::json& j, const char* key, Vec2& out) {
  if (j.contains(key)) out = vec2_of(j.at(key));
}
}  // namespace

EnvConfig env_from_json(const nlohmann::json& j) {
  EnvConfig c;
  maybe(j, "workspace_lo", c.workspace_lo);
  maybe(j, "workspace_hi", c.workspace_hi);
  maybe(j, "max_step", c.max_step);
  maybe(j, "max_dtheta", c.max_dtheta);
  maybe(j, "interaction_radius", c.interaction_radius);
  maybe(j, "press_radius", c.press_radius);
  maybe(j, "open_threshold", c.open_threshold);
  maybe(j, "closed_threshold", c.closed_threshold);
  maybe_vec(j, "drawer_handle_base", c.drawer_handle_base);
  maybe_vec(j, "drawer_axis", c.drawer_axis);
  maybe(j, "drawer_travel", c.drawer_travel);
  maybe_vec(j, "drawer_anchor_offset", c.drawer_anchor_offset);
  maybe_vec(j, "slider_handle_base", c.slider_handle_base);
  maybe_vec(j, "slider_axis", c.slider_axis);
  maybe(j, "slider_travel", c.slider_travel);
  maybe_vec(j, "shelf_lo", c.shelf_lo);
  maybe_vec(j, "shelf_hi", c.shelf_hi);
  maybe_vec(j, "shelf_anchor", c.shelf_anchor);
  if (j.contains("buttons"))
    for (int i = 0; i < 3; ++i) c.buttons[i] = vec2_of(j["buttons"][i]);
  maybe(j, "capture_radius", c.capture_radius);
  maybe(j, "wrapped_angle", c.wrapped_angle);
  maybe(j, "seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json policy_to_json(const PolicyConfig& c) {
  return nlohmann::json{{"action_noise", c.action_noise},
                        {"tol_pos", c.tol_pos},
                        {"tol_frac", c.tol_frac},
                        {"tol_angle", c.tol_angle},
                        {"access_open", c.access_open}};
}

PolicyConfig policy_from_json(const nlohmann::json& j) {
  PolicyConfig c;
  maybe(j, "action_noise", c.action_noise);
  maybe(j, "tol_pos", c.tol_pos);
  maybe(j, "tol_frac", c.tol_frac);
  maybe(j, "tol_angle", c.tol_angle);
  maybe(j, "access_open", c.access_open);
  c.validate();
  return c;
}

void save_plan(const PlanFile& plan, const std::string& path) {
  nlohmann::json j;
  j["format"] = "belt-plan";
  j["version"] = 1;
  j["planner"] = plan.planner;
  j["model"] = plan.model;
  j["chain"] = plan.chain;
  j["x_init"] = state_to_json(plan.x_init);
  j["solved"] = plan.solved;
  j["cost"] = plan.cost;
  nlohmann::json edges = nlohmann::json::array();
  for (size_t i = 0; i < plan.tasks.size(); ++i) {
    edges.push_back(
        {{"goal", state_to_json(plan.tasks[i].goal)}, {"horizon", plan.horizons[i]}});
  }
  j["edges"] = edges;
  write_text_file(path, j.dump(1) + "\n");
}

PlanFile load_plan(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  if (j.value("format", "") != "belt-plan")
    throw std::runtime_error("not a belt plan file: " + path);
  PlanFile plan;
  plan.planner = j["planner"];
  plan.model = j["model"];
  plan.chain = j["chain"];
  plan.x_init = state_from_json(j["x_init"]);
  plan.solved = j["solved"];
  plan.cost = j["cost"];
  for (const auto& e : j["edges"]) {
    plan.tasks.push_back(Task{state_from_json(e["goal"])});
    plan.horizons.push_back(e["horizon"]);
  }
  return plan;
}

Csv iteration_log_csv(const std::vector<IterationRecord>& log) {
  Csv csv({"iteration", "goal_digest", "expanded_node", "horizon", "success"});
  char digest[32];
  for (const IterationRecord& r : log) {
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(r.goal_digest));
    csv.row({std::to_string(r.iteration), digest, std::to_string(r.expanded_node),
             std::to_string(r.horizon), r.success ? "1" : "0"});
  }
  return csv;
}

}  // namespace belt
