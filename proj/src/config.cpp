// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/config.hpp"

#include <cmath>
#include <set>

#include "funnelforge/error.hpp"

namespace funnelforge::config {

using io::Json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::ValidationError, path + ": " + why);
}

// A JSON object being read, with its path for error messages. Every key must
// be consumed by one of the accessors; finish() rejects the rest.
class Node {
 public:
  Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* raw(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  Node child(const std::string& key) {
    const Json* v = raw(key);
    if (!v) invalid(at(key), "missing block");
    return Node(*v, at(key));
  }

  std::optional<Node> optional_child(const std::string& key) {
    const Json* v = raw(key);
    if (!v) return std::nullopt;
    return Node(*v, at(key));
  }

  std::optional<double> number(const std::string& key) {
    const Json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) invalid(at(key), "expected a number");
    return v->get<double>();
  }

  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  double required_number(const std::string& key) {
    auto v = number(key);
    if (!v) invalid(at(key), "missing");
    return *v;
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const Json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) invalid(at(key), "expected an integer");
    return v->get<std::int64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const Json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) invalid(at(key), "expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const Json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) invalid(at(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<Eigen::VectorXd> vector(const std::string& key, std::optional<std::size_t> size = std::nullopt) {
    const Json* v = raw(key);
    if (!v) return std::nullopt;
    return as_vector(*v, at(key), size);
  }

  Eigen::VectorXd required_vector(const std::string& key, std::optional<std::size_t> size = std::nullopt) {
    auto v = vector(key, size);
    if (!v) invalid(at(key), "missing");
    return *v;
  }

  const Json* required_array(const std::string& key) {
    const Json* v = raw(key);
    if (!v) invalid(at(key), "missing");
    if (!v->is_array()) invalid(at(key), "expected an array");
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) invalid(at(key), "unknown key");
    }
  }

  static Eigen::VectorXd as_vector(const Json& v, const std::string& path, std::optional<std::size_t> size) {
    if (!v.is_array()) invalid(path, "expected an array of numbers");
    if (size && v.size() != *size) invalid(path, "expected " + std::to_string(*size) + " entries");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) invalid(path + "[" + std::to_string(i) + "]", "expected a number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::Vector2d point(const Json& v, const std::string& path) {
  const Eigen::VectorXd p = Node::as_vector(v, path, 2);
  return {p[0], p[1]};
}

// Re-prefix errors from the library's own validators with the block path.
template <typename F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ValidationError) throw;
    std::string msg = e.what();
    const std::string tag = std::string(to_string(ErrorCode::ValidationError)) + ": ";
    if (msg.rfind(tag, 0) == 0) msg = msg.substr(tag.size());
    if (msg.rfind(path, 0) == 0) throw Error(ErrorCode::ValidationError, msg);
    invalid(path, msg);
  }
}

dynamics::RobotModel parse_robot(Node n) {
  dynamics::RobotModel m;
  m.link_lengths = n.required_vector("link_lengths");
  m.point_masses = n.required_vector("point_masses", static_cast<std::size_t>(m.link_lengths.size()));
  m.torque_limits = n.required_vector("torque_limits", static_cast<std::size_t>(m.link_lengths.size()));
  if (auto b = n.vector("base", 2)) m.base_position = Eigen::Vector2d((*b)[0], (*b)[1]);
  n.finish();
  validated("robot", [&] { m.validate(); });
  if (m.dof() != 2) invalid("robot.link_lengths", "only two-link arms are supported");
  return m;
}

world::Workspace parse_workspace(Node n) {
  world::Workspace ws;
  ws.reach_radius = n.number("reach_radius", ws.reach_radius);
  if (auto c = n.vector("center", 2)) ws.center = Eigen::Vector2d((*c)[0], (*c)[1]);
  const Json* regions = n.required_array("regions");
  for (std::size_t i = 0; i < regions->size(); ++i) {
    Node r((*regions)[i], n.at("regions") + "[" + std::to_string(i) + "]");
    const auto name = r.string("name");
    if (!name || name->empty()) invalid(r.at("name"), "missing");
    const std::string role = r.string("role").value_or("task");
    world::RegionRole parsed_role;
    try {
      parsed_role = world::region_role_from_string(role);
    } catch (const Error&) {
      invalid(r.at("role"), "expected task, obstacle or base");
    }
    const Json* verts = r.required_array("vertices");
    std::vector<Eigen::Vector2d> pts;
    for (std::size_t k = 0; k < verts->size(); ++k) {
      pts.push_back(point((*verts)[k], r.at("vertices") + "[" + std::to_string(k) + "]"));
    }
    r.finish();
    world::Polytope poly;
    validated(r.at("vertices"), [&] { poly = world::Polytope(*name, pts); });
    ws.regions.push_back({poly, parsed_role});
  }
  n.finish();
  validated("workspace", [&] { ws.validate(); });
  return ws;
}

bp::SynthesisConfig parse_synthesis(std::optional<Node> n, const dynamics::RobotModel& robot) {
  bp::SynthesisConfig s = bp::SynthesisConfig::defaults_for(robot);
  if (!n) return s;
  const auto dof = static_cast<std::size_t>(robot.dof());
  s.alpha = n->number("alpha", s.alpha);
  if (auto v = n->vector("xbar", 2)) s.xbar = *v;
  if (auto v = n->vector("qdotbar", dof)) s.qdotbar = *v;
  if (auto v = n->vector("ubar", dof)) s.ubar = *v;
  if (auto v = n->integer("edge_samples")) s.edge_samples = static_cast<int>(*v);
  if (auto v = n->boolean("joint_box_constraint")) s.joint_box_constraint = *v;
  if (auto v = n->vector("box_scales")) s.box_scales.assign(v->data(), v->data() + v->size());
  s.max_box_half_width = n->number("max_box_half_width", s.max_box_half_width);
  if (auto v = n->string("ik_branch")) {
    try {
      s.ik_branch = dynamics::ik_branch_from_string(*v);
    } catch (const Error&) {
      invalid(n->at("ik_branch"), "expected elbow-down or elbow-up");
    }
  }
  if (auto l = n->optional_child("ldi")) {
    if (auto v = l->integer("position_grid")) s.ldi.position_grid = static_cast<int>(*v);
    if (auto v = l->integer("velocity_grid")) s.ldi.velocity_grid = static_cast<int>(*v);
    s.ldi.safety_factor = l->number("safety_factor", s.ldi.safety_factor);
    if (auto v = l->boolean("relative_input_fit")) s.ldi.relative_input_fit = *v;
    l->finish();
  }
  if (auto o = n->optional_child("solver")) {
    s.solver.tol = o->number("tol", s.solver.tol);
    if (auto v = o->integer("max_iter")) s.solver.max_iter = static_cast<int>(*v);
    s.solver.barrier_factor = o->number("barrier_factor", s.solver.barrier_factor);
    s.solver.feasibility_margin = o->number("feasibility_margin", s.solver.feasibility_margin);
    s.solver.domain_radius = o->number("domain_radius", s.solver.domain_radius);
    o->finish();
  }
  n->finish();
  return s;
}

bprrt::PlannerConfig parse_planner(std::optional<Node> n) {
  bprrt::PlannerConfig p;
  if (!n) return p;
  p.epsilon = n->number("epsilon", p.epsilon);
  p.delta = n->number("delta", p.delta);
  if (auto v = n->integer("max_iterations")) p.max_iterations = static_cast<int>(*v);
  if (auto v = n->integer("seed")) {
    if (*v < 0) invalid(n->at("seed"), "must be non-negative");
    p.rng_seed = static_cast<std::uint64_t>(*v);
  }
  p.joint_sample_limit = n->number("joint_sample_limit", p.joint_sample_limit);
  n->finish();
  return p;
}

ExecutionConfig parse_execution(std::optional<Node> n) {
  ExecutionConfig e;
  if (!n) return e;
  e.dt = n->number("dt", e.dt);
  e.t_max = n->number("t_max", e.t_max);
  e.switch_level = n->number("switch_level");
  n->finish();
  return e;
}

MissionConfig parse_mission(Node n) {
  MissionConfig m;
  const auto ltl = n.string("ltl");
  if (!ltl || ltl->empty()) invalid(n.at("ltl"), "missing");
  m.ltl = *ltl;
  if (auto v = n.integer("cycles")) m.cycles = static_cast<int>(*v);
  n.finish();
  return m;
}

}  // namespace

executor::SimulationOptions ExecutionConfig::resolve(double epsilon) const {
  executor::SimulationOptions o;
  o.dt = dt;
  o.t_max = t_max;
  o.switch_level = switch_level.value_or(epsilon / 2.0);
  return o;
}

void Bundle::validate() const {
  validated("robot", [&] { robot.validate(); });
  validated("workspace", [&] { workspace.validate(); });
  validated("synthesis", [&] { synthesis.validate(robot.dof()); });
  validated("planner", [&] { planner.validate(); });
  if (!(execution.dt > 0.0)) invalid("execution.dt", "must be positive");
  if (!(execution.t_max >= execution.dt)) invalid("execution.t_max", "must be at least dt");
  if (execution.switch_level && !(*execution.switch_level >= planner.epsilon && *execution.switch_level <= 0.0)) {
    invalid("execution.switch_level", "must lie in [planner.epsilon, 0]");
  }
  if (mission.cycles < 1) invalid("mission.cycles", "must be at least 1");
  if (workspace.has_region(std::string(world::kFreeLabel))) {
    invalid("workspace.regions", "'" + std::string(world::kFreeLabel) + "' is reserved for the free label");
  }
}

Bundle parse_config(const Json& j) {
  Node root(j, "");
  Bundle b;
  b.description = root.string("description").value_or("");
  b.robot = parse_robot(root.child("robot"));
  b.workspace = parse_workspace(root.child("workspace"));
  b.synthesis = parse_synthesis(root.optional_child("synthesis"), b.robot);
  b.planner = parse_planner(root.optional_child("planner"));
  b.execution = parse_execution(root.optional_child("execution"));
  b.mission = parse_mission(root.child("mission"));
  root.finish();
  b.validate();
  return b;
}

Bundle load_config(const std::string& path) { return parse_config(io::read_json_file(path)); }

Json config_to_json(const Bundle& b) {
  Json regions = Json::array();
  for (const auto& r : b.workspace.regions) {
    Json v = io::polytope_to_json(r.polytope);
    v["role"] = std::string(world::to_string(r.role));
    regions.push_back(v);
  }
  const auto& s = b.synthesis;
  Json out = {
      {"description", b.description},
      {"robot",
       {{"link_lengths", io::vector_to_json(b.robot.link_lengths)},
        {"point_masses", io::vector_to_json(b.robot.point_masses)},
        {"torque_limits", io::vector_to_json(b.robot.torque_limits)},
        {"base", io::vector_to_json(b.robot.base_position)}}},
      {"workspace",
       {{"reach_radius", b.workspace.reach_radius},
        {"center", io::vector_to_json(b.workspace.center)},
        {"regions", regions}}},
      {"synthesis",
       {{"alpha", s.alpha},
        {"xbar", io::vector_to_json(s.xbar)},
        {"qdotbar", io::vector_to_json(s.qdotbar)},
        {"ubar", io::vector_to_json(s.ubar)},
        {"edge_samples", s.edge_samples},
        {"joint_box_constraint", s.joint_box_constraint},
        {"box_scales", s.box_scales},
        {"max_box_half_width", s.max_box_half_width},
        {"ik_branch", std::string(dynamics::to_string(s.ik_branch))},
        {"ldi",
         {{"position_grid", s.ldi.position_grid},
          {"velocity_grid", s.ldi.velocity_grid},
          {"safety_factor", s.ldi.safety_factor},
          {"relative_input_fit", s.ldi.relative_input_fit}}},
        {"solver",
         {{"tol", s.solver.tol},
          {"max_iter", s.solver.max_iter},
          {"barrier_factor", s.solver.barrier_factor},
          {"feasibility_margin", s.solver.feasibility_margin},
          {"domain_radius", s.solver.domain_radius}}}}},
      {"planner",
       {{"epsilon", b.planner.epsilon},
        {"delta", b.planner.delta},
        {"max_iterations", b.planner.max_iterations},
        {"seed", b.planner.rng_seed},
        {"joint_sample_limit", b.planner.joint_sample_limit}}},
      {"execution", {{"dt", b.execution.dt}, {"t_max", b.execution.t_max}}},
      {"mission", {{"ltl", b.mission.ltl}, {"cycles", b.mission.cycles}}}};
  if (b.execution.switch_level) out["execution"]["switch_level"] = *b.execution.switch_level;
  return out;
}

std::string config_hash(const Bundle& b) { return io::hex64(io::fnv1a(config_to_json(b).dump())); }

void apply_overrides(Bundle& b, std::optional<double> epsilon, std::optional<double> alpha,
                     std::optional<std::uint64_t> seed) {
  if (epsilon) b.planner.epsilon = *epsilon;
  if (alpha) b.synthesis.alpha = *alpha;
  if (seed) b.planner.rng_seed = *seed;
  b.validate();
}

}  // namespace funnelforge::config
