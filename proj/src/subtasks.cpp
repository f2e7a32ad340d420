#include "belt/subtasks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace belt {

namespace {

const std::vector<SubtaskId> kAll{
    SubtaskId::OpenDrawer,  SubtaskId::CloseDrawer, SubtaskId::OpenSlider,
    SubtaskId::CloseSlider, SubtaskId::Grasp,       SubtaskId::PlaceOnTable,
    SubtaskId::RotateLeft,  SubtaskId::RotateRight, SubtaskId::PushButtonR,
    SubtaskId::PushButtonG, SubtaskId::PushButtonB, SubtaskId::PutIntoShelf,
    SubtaskId::PullFromShelf, SubtaskId::SweepIntoDrawer};

const std::vector<std::string> kNames{
    "open_drawer",  "close_drawer",   "open_slider",    "close_slider",
    "grasp",        "place_on_table", "rotate_left",    "rotate_right",
    "push_button_r", "push_button_g", "push_button_b",  "put_into_shelf",
    "pull_from_shelf", "sweep_into_drawer"};

// Abstract pre/post used by the chain-compatibility relation.
enum class Tri { Closed, Open, Any };

struct AbstractSpec {
  Tri pre_drawer = Tri::Any, post_drawer = Tri::Any;
  Tri pre_slider = Tri::Any, post_slider = Tri::Any;
  unsigned pre_zone = 0xF;                 // bitmask over Zone values
  std::optional<Zone> post_zone;
};

unsigned zmask(std::initializer_list<Zone> zs) {
  unsigned m = 0;
  for (Zone z : zs) m |= 1u << static_cast<int>(z);
  return m;
}

const AbstractSpec& abstract_spec(SubtaskId id) {
  static const std::map<SubtaskId, AbstractSpec> table = [] {
    std::map<SubtaskId, AbstractSpec> t;
    AbstractSpec s;

    s = {};
    s.pre_drawer = Tri::Closed;
    s.post_drawer = Tri::Open;
    t[SubtaskId::OpenDrawer] = s;

    s = {};
    s.pre_drawer = Tri::Open;
    s.post_drawer = Tri::Closed;
    t[SubtaskId::CloseDrawer] = s;

    s = {};
    s.pre_slider = Tri::Closed;
    s.post_slider = Tri::Open;
    t[SubtaskId::OpenSlider] = s;

    s = {};
    s.pre_slider = Tri::Open;
    s.post_slider = Tri::Closed;
    t[SubtaskId::CloseSlider] = s;

    s = {};
    s.pre_zone = zmask({Zone::Table, Zone::Drawer, Zone::Shelf});
    s.post_zone = Zone::Held;
    t[SubtaskId::Grasp] = s;

    s = {};
    s.pre_zone = zmask({Zone::Held});
    s.post_zone = Zone::Table;
    t[SubtaskId::PlaceOnTable] = s;

    s = {};
    s.pre_zone = zmask({Zone::Table, Zone::Held});
    s.post_zone = Zone::Table;
    t[SubtaskId::RotateLeft] = s;
    t[SubtaskId::RotateRight] = s;

    s = {};
    t[SubtaskId::PushButtonR] = s;
    t[SubtaskId::PushButtonG] = s;
    t[SubtaskId::PushButtonB] = s;

    s = {};
    s.pre_zone = zmask({Zone::Table, Zone::Held});
    s.post_zone = Zone::Shelf;
    s.post_slider = Tri::Open;
    t[SubtaskId::PutIntoShelf] = s;

    s = {};
    s.pre_zone = zmask({Zone::Shelf});
    s.post_zone = Zone::Table;
    s.post_slider = Tri::Open;
    t[SubtaskId::PullFromShelf] = s;

    s = {};
    s.pre_zone = zmask({Zone::Table});
    s.post_zone = Zone::Drawer;
    s.post_drawer = Tri::Open;
    t[SubtaskId::SweepIntoDrawer] = s;
    return t;
  }();
  return table.at(id);
}

int button_index(SubtaskId id) {
  switch (id) {
    case SubtaskId::PushButtonR: return 0;
    case SubtaskId::PushButtonG: return 1;
    case SubtaskId::PushButtonB: return 2;
    default: return -1;
  }
}

// Re-establish dependent fields after editing a goal state.
void finalize_goal(State& s, const EnvConfig& c) {
  s.effector = c.clamp_to_workspace(s.effector);
  s.block = c.clamp_to_workspace(s.block);
  switch (s.block_zone) {
    case Zone::Held: s.block = s.effector; break;
    case Zone::Drawer: s.block = c.drawer_anchor(s.drawer_ext); break;
    case Zone::Shelf: s.block = c.shelf_anchor; break;
    case Zone::Table: break;
  }
  for (int i = 0; i < 3; ++i)
    s.lights[i] = (s.effector - c.buttons[i]).norm() <= c.press_radius;
  s.t = 0;
}

Vec2 random_table_point(const EnvConfig& c, RandomStream& rng) {
  // Keep clear of the shelf region and the workspace edge.
  for (int attempt = 0; attempt < 64; ++attempt) {
    Vec2 p(rng.uniform(c.workspace_lo + 0.5, c.workspace_hi - 0.5),
           rng.uniform(c.workspace_lo + 0.5, c.workspace_hi - 2.2));
    if (!c.in_shelf_region(p)) return p;
  }
  return Vec2(6.0, 3.0);
}

}  // namespace

const std::vector<SubtaskId>& all_subtasks() { return kAll; }

const std::string& subtask_name(SubtaskId id) { return kNames[static_cast<int>(id)]; }

std::optional<SubtaskId> subtask_from_name(const std::string& name) {
  for (int i = 0; i < kNumSubtasks; ++i)
    if (kNames[i] == name) return static_cast<SubtaskId>(i);
  return std::nullopt;
}

bool subtask_transient(SubtaskId id) { return button_index(id) >= 0; }

bool subtask_applicable(SubtaskId id, const State& s, const EnvConfig& c) {
  switch (id) {
    case SubtaskId::OpenDrawer: return s.drawer_ext < c.open_threshold;
    case SubtaskId::CloseDrawer: return s.drawer_ext >= c.open_threshold;
    case SubtaskId::OpenSlider: return s.slider_pos < c.open_threshold;
    case SubtaskId::CloseSlider: return s.slider_pos >= c.open_threshold;
    case SubtaskId::Grasp: return s.block_zone != Zone::Held;
    case SubtaskId::PlaceOnTable: return s.block_zone == Zone::Held;
    case SubtaskId::RotateLeft:
    case SubtaskId::RotateRight:
      return s.block_zone == Zone::Table || s.block_zone == Zone::Held;
    case SubtaskId::PushButtonR:
    case SubtaskId::PushButtonG:
    case SubtaskId::PushButtonB: return true;
    case SubtaskId::PutIntoShelf:
      return s.block_zone == Zone::Table || s.block_zone == Zone::Held;
    case SubtaskId::PullFromShelf: return s.block_zone == Zone::Shelf;
    case SubtaskId::SweepIntoDrawer: return s.block_zone == Zone::Table;
  }
  return false;
}

State subtask_goal(SubtaskId id, const State& start, const EnvConfig& c, RandomStream& rng) {
  State g = start;
  switch (id) {
    case SubtaskId::OpenDrawer:
      g.drawer_ext = 1.0;
      g.effector = c.drawer_handle(g.drawer_ext);
      g.gripper_closed = true;
      break;
    case SubtaskId::CloseDrawer:
      g.drawer_ext = 0.0;
      g.effector = c.drawer_handle(g.drawer_ext);
      g.gripper_closed = true;
      break;
    case SubtaskId::OpenSlider:
      g.slider_pos = 1.0;
      g.effector = c.slider_handle(g.slider_pos);
      g.gripper_closed = true;
      break;
    case SubtaskId::CloseSlider:
      g.slider_pos = 0.0;
      g.effector = c.slider_handle(g.slider_pos);
      g.gripper_closed = true;
      break;
    case SubtaskId::Grasp:
      if (g.block_zone == Zone::Drawer && g.drawer_ext < c.open_threshold) g.drawer_ext = 1.0;
      if (g.block_zone == Zone::Shelf && g.slider_pos < c.open_threshold) g.slider_pos = 1.0;
      if (g.block_zone == Zone::Drawer) g.block = c.drawer_anchor(g.drawer_ext);
      g.block_zone = Zone::Held;
      g.effector = g.block;
      g.gripper_closed = true;
      break;
    case SubtaskId::PlaceOnTable:
      g.block = random_table_point(c, rng);
      g.block_zone = Zone::Table;
      g.effector = g.block;
      g.gripper_closed = false;
      break;
    case SubtaskId::RotateLeft:
    case SubtaskId::RotateRight: {
      double delta = (id == SubtaskId::RotateLeft) ? -kRotateTarget : kRotateTarget;
      g.block_angle = wrap_angle(g.block_angle + delta);
      if (g.block_zone == Zone::Held) g.block = g.effector;
      g.block_zone = Zone::Table;
      g.effector = g.block;
      g.gripper_closed = false;
      break;
    }
    case SubtaskId::PushButtonR:
    case SubtaskId::PushButtonG:
    case SubtaskId::PushButtonB:
      g.effector = c.buttons[button_index(id)];
      g.gripper_closed = false;
      break;
    case SubtaskId::PutIntoShelf:
      if (g.slider_pos < c.open_threshold) g.slider_pos = 1.0;
      g.block_zone = Zone::Shelf;
      g.effector = c.shelf_anchor;
      g.gripper_closed = false;
      break;
    case SubtaskId::PullFromShelf:
      if (g.slider_pos < c.open_threshold) g.slider_pos = 1.0;
      g.block_zone = Zone::Table;
      g.block = Vec2(rng.uniform(4.4, 5.6), rng.uniform(7.0, 7.8));
      g.effector = g.block;
      g.gripper_closed = false;
      break;
    case SubtaskId::SweepIntoDrawer:
      if (g.drawer_ext < c.open_threshold) g.drawer_ext = 1.0;
      g.block_zone = Zone::Drawer;
      g.effector = c.drawer_anchor(g.drawer_ext);
      g.gripper_closed = false;
      break;
  }
  finalize_goal(g, c);
  return g;
}

SubtaskMatcher::SubtaskMatcher(SubtaskId id, const EnvConfig* config)
    : id_(id), config_(config) {}

bool SubtaskMatcher::advance(const State& s) {
  if (done_) return true;
  const EnvConfig& c = *config_;
  switch (id_) {
    case SubtaskId::OpenDrawer:
      if (s.drawer_ext >= c.open_threshold) done_ = entered_;
      else entered_ = true;
      break;
    case SubtaskId::CloseDrawer:
      if (entered_ && s.drawer_ext <= c.closed_threshold) done_ = true;
      else if (s.drawer_ext >= c.open_threshold) entered_ = true;
      break;
    case SubtaskId::OpenSlider:
      if (s.slider_pos >= c.open_threshold) done_ = entered_;
      else entered_ = true;
      break;
    case SubtaskId::CloseSlider:
      if (entered_ && s.slider_pos <= c.closed_threshold) done_ = true;
      else if (s.slider_pos >= c.open_threshold) entered_ = true;
      break;
    case SubtaskId::Grasp:
      if (s.block_zone == Zone::Held) done_ = entered_;
      else entered_ = true;
      break;
    case SubtaskId::PlaceOnTable:
      if (entered_ && s.block_zone == Zone::Table) done_ = true;
      else if (s.block_zone == Zone::Held) entered_ = true;
      break;
    case SubtaskId::PutIntoShelf:
      if (entered_ && s.block_zone == Zone::Shelf) done_ = true;
      else if (s.block_zone == Zone::Table || s.block_zone == Zone::Held) entered_ = true;
      break;
    case SubtaskId::PullFromShelf:
      if (entered_ && s.block_zone == Zone::Table) done_ = true;
      else if (s.block_zone == Zone::Shelf) entered_ = true;
      break;
    case SubtaskId::SweepIntoDrawer:
      if (entered_ && s.block_zone == Zone::Drawer) done_ = true;
      else if (s.block_zone == Zone::Table) entered_ = true;
      break;
    case SubtaskId::PushButtonR:
    case SubtaskId::PushButtonG:
    case SubtaskId::PushButtonB:
      if (s.lights[button_index(id_)]) done_ = true;
      break;
    case SubtaskId::RotateLeft:
    case SubtaskId::RotateRight: {
      // Cumulative rotation from consecutive stored states; completion when
      // some earlier reference differs from the current total by a quarter
      // turn (signed) within tolerance.
      if (!have_last_) {
        have_last_ = true;
        last_angle_ = s.block_angle;
        cum_rotation_ = 0.0;
        rotation_refs_.assign(1, 0.0);
        break;
      }
      cum_rotation_ += angle_diff(s.block_angle, last_angle_);
      last_angle_ = s.block_angle;
      const double target = (id_ == SubtaskId::RotateLeft) ? -kRotateTarget : kRotateTarget;
      for (double ref : rotation_refs_) {
        if (std::abs((cum_rotation_ - ref) - target) <= kRotateTolerance) {
          done_ = true;
          break;
        }
      }
      if (!done_ && (rotation_refs_.empty() ||
                     std::abs(cum_rotation_ - rotation_refs_.back()) > 1e-9)) {
        rotation_refs_.push_back(cum_rotation_);
      }
      break;
    }
  }
  return done_;
}

std::string ChainSpec::to_string() const {
  std::string out;
  for (size_t i = 0; i < subtasks.size(); ++i) {
    if (i) out += ",";
    out += subtask_name(subtasks[i]);
  }
  return out;
}

ChainSpec ChainSpec::parse(const std::string& text) {
  ChainSpec chain;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto id = subtask_from_name(item);
    if (!id) throw std::invalid_argument("unknown subtask: " + item);
    chain.subtasks.push_back(*id);
  }
  return chain;
}

bool ChainSpec::contains(SubtaskId id) const {
  return std::find(subtasks.begin(), subtasks.end(), id) != subtasks.end();
}

bool ChainSpec::contains_button() const {
  return contains(SubtaskId::PushButtonR) || contains(SubtaskId::PushButtonG) ||
         contains(SubtaskId::PushButtonB);
}

ChainMatcher::ChainMatcher(const ChainSpec& chain, const EnvConfig* config)
    : config_(config), subtasks_(chain.subtasks) {
  if (!subtasks_.empty()) current_ = SubtaskMatcher(subtasks_[0], config_);
}

void ChainMatcher::advance(const State& s) {
  // A single state may complete several stages in cascade (the completing
  // state also initializes the next automaton).
  while (index_ < static_cast<int>(subtasks_.size()) && current_.advance(s)) {
    ++index_;
    if (index_ < static_cast<int>(subtasks_.size())) {
      current_ = SubtaskMatcher(subtasks_[index_], config_);
    } else {
      break;
    }
  }
}

bool ChainMatcher::done() const { return index_ == static_cast<int>(subtasks_.size()); }

bool detect(const SuccessDetector& detector, std::span<const State> trajectory) {
  ChainMatcher m = detector.matcher();
  for (const State& s : trajectory) m.advance(s);
  return m.done();
}

bool compatible(SubtaskId a, SubtaskId b) {
  if (a == b) return false;
  const AbstractSpec& pa = abstract_spec(a);
  const AbstractSpec& pb = abstract_spec(b);
  auto tri_ok = [](Tri post, Tri pre) {
    return post == Tri::Any || pre == Tri::Any || post == pre;
  };
  if (!tri_ok(pa.post_drawer, pb.pre_drawer)) return false;
  if (!tri_ok(pa.post_slider, pb.pre_slider)) return false;
  if (pa.post_zone && !(pb.pre_zone & (1u << static_cast<int>(*pa.post_zone)))) return false;
  return true;
}

std::vector<ChainSpec> generate_chains(int length) {
  std::vector<ChainSpec> out;
  ChainSpec current;
  auto recurse = [&](auto&& self, int depth) -> void {
    if (depth == length) {
      out.push_back(current);
      return;
    }
    for (SubtaskId id : kAll) {
      if (depth > 0 && !compatible(current.subtasks.back(), id)) continue;
      current.subtasks.push_back(id);
      self(self, depth + 1);
      current.subtasks.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

}  // namespace belt
