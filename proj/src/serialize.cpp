// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "funnelforge/error.hpp"

namespace funnelforge::io {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const Json& at(const Json& j, const char* key) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "'");
  return *it;
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return at(j, key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("key '") + key + "': " + e.what());
  }
}

void expect_kind(const Json& j, const char* kind) {
  const auto k = get<std::string>(j, "kind");
  if (k != kind) throw Error(ErrorCode::ParseError, "expected kind '" + std::string(kind) + "', found '" + k + "'");
}

Json label_to_json(const logic::Label& l) { return Json(std::vector<std::string>(l.begin(), l.end())); }

logic::Label label_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "label must be an array of names");
  logic::Label out;
  for (const auto& e : j) out.insert(e.get<std::string>());
  return out;
}

Json point_to_json(const Eigen::Vector2d& p) { return Json::array({p.x(), p.y()}); }

Eigen::Vector2d point_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, "point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Json matrix_to_json(const MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXd matrix_from_json(const Json& j) {
  const auto rows = get<Eigen::Index>(j, "rows");
  const auto cols = get<Eigen::Index>(j, "cols");
  const Json& data = at(j, "data");
  if (rows < 0 || cols < 0 || !data.is_array() || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw Error(ErrorCode::ParseError, "matrix data does not match rows x cols");
  }
  MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  }
  return m;
}

Json vector_to_json(const VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "vector must be an array of numbers");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

bool same_matrix(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

Json polytope_to_json(const world::Polytope& p) {
  Json verts = Json::array();
  for (const auto& v : p.vertices()) verts.push_back(point_to_json(v));
  return {{"name", p.name()}, {"vertices", verts}};
}

world::Polytope polytope_from_json(const Json& j) {
  std::vector<Eigen::Vector2d> verts;
  for (const auto& v : at(j, "vertices")) verts.push_back(point_from_json(v));
  return world::Polytope(get<std::string>(j, "name"), std::move(verts));
}

Json triple_to_json(const ldi::NormBoundTriple& t) {
  return {{"N1", matrix_to_json(t.N1)}, {"N2", matrix_to_json(t.N2)}, {"N3", matrix_to_json(t.N3)},
          {"beta", t.beta},             {"shape", matrix_to_json(t.shape)}};
}

ldi::NormBoundTriple triple_from_json(const Json& j) {
  ldi::NormBoundTriple t;
  t.N1 = matrix_from_json(at(j, "N1"));
  t.N2 = matrix_from_json(at(j, "N2"));
  t.N3 = matrix_from_json(at(j, "N3"));
  t.beta = get<double>(j, "beta");
  t.shape = matrix_from_json(at(j, "shape"));
  return t;
}

Json ldi_to_json(const ldi::NormBoundLDI& l) {
  return {{"A", triple_to_json(l.A)},
          {"B", triple_to_json(l.B)},
          {"J", triple_to_json(l.J)},
          {"q_e", vector_to_json(l.q_e)},
          {"box", {{"position", vector_to_json(l.box.position)}, {"velocity", vector_to_json(l.box.velocity)}}},
          {"safety_factor", l.safety_factor}};
}

ldi::NormBoundLDI ldi_from_json(const Json& j) {
  ldi::NormBoundLDI l;
  l.A = triple_from_json(at(j, "A"));
  l.B = triple_from_json(at(j, "B"));
  l.J = triple_from_json(at(j, "J"));
  l.q_e = vector_from_json(at(j, "q_e"));
  l.box.position = vector_from_json(at(at(j, "box"), "position"));
  l.box.velocity = vector_from_json(at(at(j, "box"), "velocity"));
  l.safety_factor = get<double>(j, "safety_factor");
  return l;
}

namespace {

bool same_triple(const ldi::NormBoundTriple& a, const ldi::NormBoundTriple& b) {
  return same_matrix(a.N1, b.N1) && same_matrix(a.N2, b.N2) && same_matrix(a.N3, b.N3) && a.beta == b.beta &&
         same_matrix(a.shape, b.shape);
}

bool same_ldi(const ldi::NormBoundLDI& a, const ldi::NormBoundLDI& b) {
  return same_triple(a.A, b.A) && same_triple(a.B, b.B) && same_triple(a.J, b.J) && same_matrix(a.q_e, b.q_e) &&
         same_matrix(a.box.position, b.box.position) && same_matrix(a.box.velocity, b.box.velocity) &&
         a.safety_factor == b.safety_factor;
}

}  // namespace

Json barrier_pair_to_json(const bp::BarrierPair& bp) {
  return {{"kind", "barrier_pair"},
          {"Q", matrix_to_json(bp.Q())},
          {"K", matrix_to_json(bp.K())},
          {"q_e", vector_to_json(bp.q_e())},
          {"x_e", point_to_json(bp.x_e())},
          {"alpha", bp.alpha()},
          {"log_det", bp.log_det},
          {"certified_residual", bp.certified_residual},
          {"ldi", ldi_to_json(bp.ldi())},
          {"provenance", {{"config_hash", bp.provenance.config_hash}, {"seed", bp.provenance.seed}}}};
}

bp::BarrierPair barrier_pair_from_json(const Json& j) {
  expect_kind(j, "barrier_pair");
  bp::BarrierPair out(matrix_from_json(at(j, "Q")), matrix_from_json(at(j, "K")), vector_from_json(at(j, "q_e")),
                      point_from_json(at(j, "x_e")), get<double>(j, "alpha"), ldi_from_json(at(j, "ldi")));
  out.log_det = get<double>(j, "log_det");
  out.certified_residual = get<double>(j, "certified_residual");
  const Json& prov = at(j, "provenance");
  out.provenance.config_hash = get<std::string>(prov, "config_hash");
  out.provenance.seed = get<std::uint64_t>(prov, "seed");
  return out;
}

bool same_barrier_pair(const bp::BarrierPair& a, const bp::BarrierPair& b) {
  return same_matrix(a.Q(), b.Q()) && same_matrix(a.K(), b.K()) && same_matrix(a.q_e(), b.q_e()) &&
         a.x_e() == b.x_e() && a.alpha() == b.alpha() && a.log_det == b.log_det &&
         a.certified_residual == b.certified_residual && a.provenance == b.provenance && same_ldi(a.ldi(), b.ldi());
}

Json chain_to_json(const std::vector<bp::BarrierPair>& chain) {
  Json pairs = Json::array();
  for (const auto& bp : chain) pairs.push_back(barrier_pair_to_json(bp));
  return {{"kind", "chain"}, {"pairs", pairs}};
}

std::vector<bp::BarrierPair> chain_from_json(const Json& j) {
  expect_kind(j, "chain");
  std::vector<bp::BarrierPair> out;
  for (const auto& e : at(j, "pairs")) out.push_back(barrier_pair_from_json(e));
  return out;
}

Json graph_to_json(const bprrt::BPRRTGraph& g) {
  Json verts = Json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    verts.push_back({{"id", g.vertices[i].id},
                     {"parent", g.parent[i]},
                     {"x_e", point_to_json(g.vertices[i].x_e)},
                     {"q_e", vector_to_json(g.vertices[i].q_e)},
                     {"barrier_pair", barrier_pair_to_json(g.barrier_pairs[i])}});
  }
  return {{"kind", "bprrt_graph"},
          {"epsilon", g.epsilon},
          {"iterations", g.iterations},
          {"root", g.root},
          {"init_vertex", g.init_vertex ? Json(*g.init_vertex) : Json(nullptr)},
          {"vertices", verts}};
}

bprrt::BPRRTGraph graph_from_json(const Json& j) {
  expect_kind(j, "bprrt_graph");
  bprrt::BPRRTGraph g;
  g.epsilon = get<double>(j, "epsilon");
  g.iterations = get<int>(j, "iterations");
  g.root = get<int>(j, "root");
  const Json& init = at(j, "init_vertex");
  if (!init.is_null()) g.init_vertex = init.get<int>();
  for (const auto& v : at(j, "vertices")) {
    const int id = g.add_vertex(barrier_pair_from_json(at(v, "barrier_pair")), get<int>(v, "parent"));
    if (id != get<int>(v, "id")) throw Error(ErrorCode::ParseError, "graph vertex ids must be 0, 1, 2, ...");
  }
  return g;
}

bool same_graph(const bprrt::BPRRTGraph& a, const bprrt::BPRRTGraph& b) {
  if (a.size() != b.size() || a.parent != b.parent || a.root != b.root || a.init_vertex != b.init_vertex ||
      a.epsilon != b.epsilon || a.iterations != b.iterations) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.vertices[i].id != b.vertices[i].id || a.vertices[i].x_e != b.vertices[i].x_e ||
        !same_matrix(a.vertices[i].q_e, b.vertices[i].q_e) ||
        !same_barrier_pair(a.barrier_pairs[i], b.barrier_pairs[i])) {
      return false;
    }
  }
  return true;
}

Json automaton_to_json(const logic::BuchiAutomaton& a) {
  Json trans = Json::array();
  for (const auto& t : a.transitions) trans.push_back({{"from", t.from}, {"label", label_to_json(t.label)}, {"to", t.to}});
  return {{"kind", "buchi_automaton"},
          {"states", a.states},
          {"transitions", trans},
          {"initial", a.initial},
          {"accepting", a.accepting}};
}

logic::BuchiAutomaton automaton_from_json(const Json& j) {
  expect_kind(j, "buchi_automaton");
  logic::BuchiAutomaton a;
  a.states = get<std::vector<std::string>>(j, "states");
  for (const auto& t : at(j, "transitions")) {
    a.transitions.push_back({get<int>(t, "from"), label_from_json(at(t, "label")), get<int>(t, "to")});
  }
  a.initial = get<std::vector<int>>(j, "initial");
  a.accepting = get<std::vector<int>>(j, "accepting");
  a.validate();
  return a;
}

namespace {

Json steps_to_json(const std::vector<logic::RunStep>& steps) {
  Json out = Json::array();
  for (const auto& s : steps) out.push_back({{"state", s.state}, {"label", label_to_json(s.label)}});
  return out;
}

std::vector<logic::RunStep> steps_from_json(const Json& j) {
  std::vector<logic::RunStep> out;
  for (const auto& s : j) out.push_back({get<int>(s, "state"), label_from_json(at(s, "label"))});
  return out;
}

}  // namespace

Json run_to_json(const logic::AcceptingRun& r) {
  return {{"kind", "accepting_run"}, {"prefix", steps_to_json(r.prefix)}, {"cycle", steps_to_json(r.cycle)}};
}

logic::AcceptingRun run_from_json(const Json& j) {
  expect_kind(j, "accepting_run");
  return {steps_from_json(at(j, "prefix")), steps_from_json(at(j, "cycle"))};
}

Json trace_to_json(const executor::Trace& t) {
  Json samples = Json::array();
  for (const auto& s : t.samples) {
    samples.push_back({{"t", s.t},
                       {"q", vector_to_json(s.q)},
                       {"qdot", vector_to_json(s.qdot)},
                       {"u", vector_to_json(s.u)},
                       {"x", point_to_json(s.x)},
                       {"active", s.active},
                       {"barrier_active", s.barrier_active},
                       {"barrier_next", s.barrier_next ? Json(*s.barrier_next) : Json(nullptr)},
                       {"labels", label_to_json(s.labels)}});
  }
  return {{"kind", "trace"}, {"dt", t.dt}, {"samples", samples}};
}

executor::Trace trace_from_json(const Json& j) {
  expect_kind(j, "trace");
  executor::Trace t;
  t.dt = get<double>(j, "dt");
  for (const auto& s : at(j, "samples")) {
    executor::TraceSample smp;
    smp.t = get<double>(s, "t");
    smp.q = vector_from_json(at(s, "q"));
    smp.qdot = vector_from_json(at(s, "qdot"));
    smp.u = vector_from_json(at(s, "u"));
    smp.x = point_from_json(at(s, "x"));
    smp.active = get<int>(s, "active");
    smp.barrier_active = get<double>(s, "barrier_active");
    const Json& next = at(s, "barrier_next");
    if (!next.is_null()) smp.barrier_next = next.get<double>();
    smp.labels = label_from_json(at(s, "labels"));
    t.samples.push_back(std::move(smp));
  }
  return t;
}

Json mission_report_to_json(const executor::MissionReport& r, const std::vector<std::string>& trace_files) {
  Json reqs = Json::array();
  for (const auto& q : r.requests) reqs.push_back({{"from", q.from}, {"to", q.to}});
  Json legs = Json::array();
  for (std::size_t i = 0; i < r.legs.size(); ++i) {
    const auto& l = r.legs[i];
    legs.push_back({{"goal", l.goal},
                    {"outcome", executor::to_string(l.outcome)},
                    {"samples", l.trace.samples.size()},
                    {"torque_clamps", l.torque_clamps},
                    {"obstacle_samples", l.obstacle_samples},
                    {"max_active_barrier", l.max_active_barrier},
                    {"final_active", l.final_active},
                    {"final_state", {{"q", vector_to_json(l.final_state.q)}, {"qdot", vector_to_json(l.final_state.qdot)}}},
                    {"trace_file", i < trace_files.size() ? Json(trace_files[i]) : Json(nullptr)}});
  }
  return {{"kind", "mission_report"}, {"success", r.success}, {"requests", reqs}, {"legs", legs}};
}

executor::MissionReport mission_report_from_json(const Json& j) {
  expect_kind(j, "mission_report");
  executor::MissionReport r;
  r.success = get<bool>(j, "success");
  for (const auto& q : at(j, "requests")) r.requests.push_back({get<std::string>(q, "from"), get<std::string>(q, "to")});
  for (const auto& l : at(j, "legs")) {
    executor::LegResult leg;
    leg.goal = get<std::string>(l, "goal");
    leg.outcome = executor::outcome_from_string(get<std::string>(l, "outcome"));
    leg.torque_clamps = get<int>(l, "torque_clamps");
    leg.obstacle_samples = get<int>(l, "obstacle_samples");
    leg.max_active_barrier = get<double>(l, "max_active_barrier");
    leg.final_active = get<int>(l, "final_active");
    leg.final_state.q = vector_from_json(at(at(l, "final_state"), "q"));
    leg.final_state.qdot = vector_from_json(at(at(l, "final_state"), "qdot"));
    r.legs.push_back(std::move(leg));
  }
  return r;
}

Json problem_to_json(const sdp::MaxDetProblem& p) {
  Json vars = Json::array();
  for (const auto& v : p.variables()) {
    const char* kind = v.kind == sdp::VariableKind::Scalar ? "scalar"
                       : v.kind == sdp::VariableKind::Symmetric ? "symmetric"
                                                                : "matrix";
    vars.push_back({{"name", v.name},
                    {"kind", kind},
                    {"rows", v.rows},
                    {"cols", v.cols},
                    {"offset", v.offset},
                    {"size", v.size},
                    {"lower", v.lower ? Json(*v.lower) : Json(nullptr)},
                    {"upper", v.upper ? Json(*v.upper) : Json(nullptr)}});
  }
  Json cons = Json::array();
  for (const auto& c : p.constraints()) {
    Json terms = Json::array();
    for (const auto& [index, coeff] : c.block.terms()) terms.push_back({{"index", index}, {"coeff", matrix_to_json(coeff)}});
    cons.push_back({{"name", c.name},
                    {"sense", c.sense == sdp::Sense::PositiveSemidefinite ? "psd" : "nsd"},
                    {"constant", matrix_to_json(c.block.constant())},
                    {"terms", terms}});
  }
  return {{"kind", "maxdet_problem"},
          {"num_scalars", p.num_scalars()},
          {"detvar", p.detvar()},
          {"variables", vars},
          {"constraints", cons}};
}

Json solution_to_json(const sdp::MaxDetSolution& s) {
  Json values = Json::object();
  for (const auto& [name, m] : s.values) values[name] = matrix_to_json(m);
  return {{"kind", "maxdet_solution"},
          {"status", sdp::to_string(s.status)},
          {"objective", s.objective},
          {"max_residual", s.max_residual},
          {"residuals", s.residuals},
          {"x", vector_to_json(s.x)},
          {"values", values},
          {"phase1_iterations", s.phase1_iterations},
          {"phase2_iterations", s.phase2_iterations}};
}

sdp::MaxDetSolution solution_from_json(const Json& j) {
  expect_kind(j, "maxdet_solution");
  sdp::MaxDetSolution s;
  const auto status = get<std::string>(j, "status");
  bool known = false;
  for (auto st : {sdp::Status::Optimal, sdp::Status::Infeasible, sdp::Status::MaxIterations}) {
    if (status == sdp::to_string(st)) {
      s.status = st;
      known = true;
    }
  }
  if (!known) throw Error(ErrorCode::ParseError, "unknown solver status '" + status + "'");
  s.objective = get<double>(j, "objective");
  s.max_residual = get<double>(j, "max_residual");
  s.residuals = get<std::vector<double>>(j, "residuals");
  s.x = vector_from_json(at(j, "x"));
  for (const auto& [name, m] : at(j, "values").items()) s.values[name] = matrix_from_json(m);
  s.phase1_iterations = get<int>(j, "phase1_iterations");
  s.phase2_iterations = get<int>(j, "phase2_iterations");
  return s;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create directory for '" + path + "': " + ec.message());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename onto '" + path + "': " + ec.message());
}

}  // namespace funnelforge::io
