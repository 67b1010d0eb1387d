// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "funnelforge/bp_synth.hpp"
#include "funnelforge/bprrt.hpp"
#include "funnelforge/executor.hpp"
#include "funnelforge/ldi.hpp"
#include "funnelforge/logic.hpp"
#include "funnelforge/sdp.hpp"
#include "funnelforge/world.hpp"

// JSON forms of every artifact. Matrices are {"rows", "cols", "data"} with
// data row-major; doubles are written in shortest round-trip form, so
// from_json(to_json(v)) reproduces v bit for bit. Top-level artifacts carry a
// "kind" tag. Readers throw ParseError with the offending key.
namespace funnelforge::io {

using Json = nlohmann::json;

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Json polytope_to_json(const world::Polytope& p);
world::Polytope polytope_from_json(const Json& j);

Json triple_to_json(const ldi::NormBoundTriple& t);
ldi::NormBoundTriple triple_from_json(const Json& j);
Json ldi_to_json(const ldi::NormBoundLDI& l);
ldi::NormBoundLDI ldi_from_json(const Json& j);

Json barrier_pair_to_json(const bp::BarrierPair& bp);
bp::BarrierPair barrier_pair_from_json(const Json& j);
bool same_barrier_pair(const bp::BarrierPair& a, const bp::BarrierPair& b);

Json chain_to_json(const std::vector<bp::BarrierPair>& chain);
std::vector<bp::BarrierPair> chain_from_json(const Json& j);

Json graph_to_json(const bprrt::BPRRTGraph& g);
bprrt::BPRRTGraph graph_from_json(const Json& j);
bool same_graph(const bprrt::BPRRTGraph& a, const bprrt::BPRRTGraph& b);

Json automaton_to_json(const logic::BuchiAutomaton& a);
logic::BuchiAutomaton automaton_from_json(const Json& j);
Json run_to_json(const logic::AcceptingRun& r);
logic::AcceptingRun run_from_json(const Json& j);

Json trace_to_json(const executor::Trace& t);
executor::Trace trace_from_json(const Json& j);

/// Leg traces are not embedded; `trace_files[i]` names leg i's trace artifact.
Json mission_report_to_json(const executor::MissionReport& r, const std::vector<std::string>& trace_files);
executor::MissionReport mission_report_from_json(const Json& j);

/// Debug form of a maxdet program: variables, detvar, and every constraint
/// as constant plus per-index coefficient matrices.
Json problem_to_json(const sdp::MaxDetProblem& p);
Json solution_to_json(const sdp::MaxDetSolution& s);
sdp::MaxDetSolution solution_from_json(const Json& j);

/// 64-bit FNV-1a, printed as 16 lowercase hex digits.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Pretty JSON with a trailing newline.
std::string dump(const Json& j);

/// Reads and parses a JSON file. Throws IoError or ParseError.
Json read_json_file(const std::string& path);

/// Writes via a temporary file in the same directory and a rename. Throws IoError.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace funnelforge::io
