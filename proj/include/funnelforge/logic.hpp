// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "funnelforge/error.hpp"

namespace funnelforge::logic {

class LtlSyntaxError : public Error {
 public:
  LtlSyntaxError(std::size_t position, const std::string& what)
      : Error(ErrorCode::SyntaxError, what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// ---------------------------------------------------------------------------
// LTL fragment: atoms, !, &&, ||, [] (always), <> (eventually), U (until).

enum class Op { Atom, Not, And, Or, Always, Eventually, Until };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op = Op::Atom;
  std::string atom;  // Op::Atom only
  FormulaPtr left;   // unary operand or left operand
  FormulaPtr right;  // binary operators only

  static FormulaPtr make_atom(std::string name);
  static FormulaPtr make_unary(Op op, FormulaPtr operand);
  static FormulaPtr make_binary(Op op, FormulaPtr l, FormulaPtr r);
};

/// Structural equality.
bool equal(const FormulaPtr& a, const FormulaPtr& b);

/// Precedence, tightest first: unary, U (right-assoc), && and || (left-assoc).
/// Throws LtlSyntaxError carrying the 0-based character position.
FormulaPtr parse_ltl(const std::string& text);

/// Concrete syntax with the fewest parentheses that parse back to `f`.
std::string print_ltl(const FormulaPtr& f);

/// Atom names in first-appearance order.
std::vector<std::string> propositions(const FormulaPtr& f);

/// Throws ValidationError naming the first atom not in `declared`.
void check_propositions(const FormulaPtr& f, const std::set<std::string>& declared);

// ---------------------------------------------------------------------------
// Patrol template: init && []<>a_0 && ... && [](safe U (a_0 || ...)).

struct PatrolSpec {
  std::string init_region;
  std::vector<std::string> liveness;  // patrol order, init_region first
  std::string safe_label;
};

/// Matches a conjunction against the template. Liveness order follows the
/// order of the []<> conjuncts, rotated so the init region comes first.
/// Throws UnsupportedFragment.
PatrolSpec recognize_patrol(const FormulaPtr& f);

// ---------------------------------------------------------------------------
// Automata over label sets.

using Label = std::set<std::string>;

struct Transition {
  int from = 0;
  Label label;  // fires on exactly this symbol
  int to = 0;

  bool operator==(const Transition&) const = default;
};

struct BuchiAutomaton {
  std::vector<std::string> states;
  std::vector<Transition> transitions;
  std::vector<int> initial;
  std::vector<int> accepting;

  /// Throws ValidationError when an index is out of range or S0 / S_f is empty.
  void validate() const;
  /// Successors on `symbol`, ascending.
  std::vector<int> successors(int state, const Label& symbol) const;
  /// Transitions leaving `state` in declaration order.
  std::vector<const Transition*> outgoing(int state) const;
  bool is_accepting(int state) const;

  bool operator==(const BuchiAutomaton&) const = default;
};

/// 2m states alternating "visited a_k" and "in transit after a_k"; the only
/// initial state is the transit state before a_0 and the accept state is the
/// visit of a_0. Throws EmptyLiveness, ValidationError when init_region is
/// not the first liveness region.
BuchiAutomaton build_patrol_automaton(const std::vector<std::string>& liveness,
                                      const std::string& init_region, const std::string& safe_label);

struct RunStep {
  int state = 0;
  Label label;  // symbol read when leaving `state`

  bool operator==(const RunStep&) const = default;
};

/// Lasso: the prefix reads at least one symbol and ends in cycle.front().state;
/// the cycle returns to its first state, which is accepting.
struct AcceptingRun {
  std::vector<RunStep> prefix;
  std::vector<RunStep> cycle;

  /// Throws ValidationError when the lasso shape is broken or a step is not
  /// a transition of `a`.
  void check(const BuchiAutomaton& a) const;

  bool operator==(const AcceptingRun&) const = default;
};

/// For each accepting state in index order: shortest prefix (BFS from all
/// initial states, transitions in declaration order) and shortest cycle back to
/// it. Keeps the lasso with the smallest total length, earliest on ties.
/// Throws NoAcceptingRun.
AcceptingRun find_accepting_run(const BuchiAutomaton& a);

struct TransitionRequest {
  std::string from;
  std::string to;

  bool operator==(const TransitionRequest&) const = default;
};

/// Consecutive region labels of the cycle (safe-label symbols dropped), the
/// region at the cycle start being the cycle's last region.
std::vector<TransitionRequest> run_to_transitions(const AcceptingRun& run, const std::string& safe_label);

/// Does the automaton accept prefix . cycle^omega? Product search for a
/// reachable accepting cycle. An empty cycle is rejected.
bool accepts_lasso(const BuchiAutomaton& a, const std::vector<Label>& prefix, const std::vector<Label>& cycle);

struct ReplayVerdict {
  bool accepted_prefix = true;             // every symbol had a transition
  std::optional<std::size_t> divergence;   // index of the first symbol without one
};

/// Subset simulation of a finite word from `start` (all initial states when empty).
ReplayVerdict replay(const BuchiAutomaton& a, const std::vector<Label>& word, std::vector<int> start = {});

}  // namespace funnelforge::logic
