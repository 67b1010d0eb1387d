// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/logic.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

namespace funnelforge::logic {

FormulaPtr Formula::make_atom(std::string name) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Atom;
  f->atom = std::move(name);
  return f;
}

FormulaPtr Formula::make_unary(Op op, FormulaPtr operand) {
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->left = std::move(operand);
  return f;
}

FormulaPtr Formula::make_binary(Op op, FormulaPtr l, FormulaPtr r) {
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->left = std::move(l);
  f->right = std::move(r);
  return f;
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->op != b->op) return false;
  if (a->op == Op::Atom) return a->atom == b->atom;
  return equal(a->left, b->left) && equal(a->right, b->right);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Ident, Not, Always, Eventually, And, Or, Until, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    auto two = [&](const char* t) { return s.compare(i, 2, t) == 0; };
    if (two("[]")) {
      out.push_back({Tok::Always, "[]", i});
      i += 2;
    } else if (two("<>")) {
      out.push_back({Tok::Eventually, "<>", i});
      i += 2;
    } else if (two("&&")) {
      out.push_back({Tok::And, "&&", i});
      i += 2;
    } else if (two("||")) {
      out.push_back({Tok::Or, "||", i});
      i += 2;
    } else if (c == '!') {
      out.push_back({Tok::Not, "!", i++});
    } else if (c == '(') {
      out.push_back({Tok::LParen, "(", i++});
    } else if (c == ')') {
      out.push_back({Tok::RParen, ")", i++});
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      std::string word = s.substr(i, j - i);
      out.push_back({word == "U" ? Tok::Until : Tok::Ident, word, i});
      i = j;
    } else {
      throw LtlSyntaxError(i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  FormulaPtr parse() {
    FormulaPtr f = disjunction();
    if (peek().kind != Tok::End) throw LtlSyntaxError(peek().pos, "unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  Token next() { return toks_[i_++]; }

  FormulaPtr disjunction() {
    FormulaPtr f = conjunction();
    while (peek().kind == Tok::Or) {
      next();
      f = Formula::make_binary(Op::Or, f, conjunction());
    }
    return f;
  }

  FormulaPtr conjunction() {
    FormulaPtr f = until();
    while (peek().kind == Tok::And) {
      next();
      f = Formula::make_binary(Op::And, f, until());
    }
    return f;
  }

  FormulaPtr until() {
    FormulaPtr f = unary();
    if (peek().kind == Tok::Until) {
      next();
      return Formula::make_binary(Op::Until, f, until());
    }
    return f;
  }

  FormulaPtr unary() {
    switch (peek().kind) {
      case Tok::Not: next(); return Formula::make_unary(Op::Not, unary());
      case Tok::Always: next(); return Formula::make_unary(Op::Always, unary());
      case Tok::Eventually: next(); return Formula::make_unary(Op::Eventually, unary());
      default: return primary();
    }
  }

  FormulaPtr primary() {
    const Token t = next();
    if (t.kind == Tok::Ident) return Formula::make_atom(t.text);
    if (t.kind == Tok::LParen) {
      FormulaPtr f = disjunction();
      if (peek().kind != Tok::RParen) throw LtlSyntaxError(peek().pos, "expected ')'");
      next();
      return f;
    }
    if (t.kind == Tok::End) throw LtlSyntaxError(t.pos, "unexpected end of formula");
    throw LtlSyntaxError(t.pos, "expected a proposition or '(' but found '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

int precedence(Op op) {
  switch (op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Until: return 3;
    case Op::Not:
    case Op::Always:
    case Op::Eventually: return 4;
    case Op::Atom: return 5;
  }
  return 0;
}

void print_into(const FormulaPtr& f, std::string& out) {
  auto wrapped = [&](const FormulaPtr& g, bool paren) {
    if (paren) out += '(';
    print_into(g, out);
    if (paren) out += ')';
  };
  const int p = precedence(f->op);
  switch (f->op) {
    case Op::Atom: out += f->atom; return;
    case Op::Not: out += "!"; break;
    case Op::Always: out += "[]"; break;
    case Op::Eventually: out += "<>"; break;
    case Op::And:
    case Op::Or:
      wrapped(f->left, precedence(f->left->op) < p);
      out += f->op == Op::And ? " && " : " || ";
      wrapped(f->right, precedence(f->right->op) <= p);
      return;
    case Op::Until:
      wrapped(f->left, precedence(f->left->op) <= p);
      out += " U ";
      wrapped(f->right, precedence(f->right->op) < p);
      return;
  }
  wrapped(f->left, precedence(f->left->op) < p);
}

void collect_atoms(const FormulaPtr& f, std::vector<std::string>& out) {
  if (!f) return;
  if (f->op == Op::Atom) {
    if (std::find(out.begin(), out.end(), f->atom) == out.end()) out.push_back(f->atom);
    return;
  }
  collect_atoms(f->left, out);
  collect_atoms(f->right, out);
}

void flatten(const FormulaPtr& f, Op op, std::vector<FormulaPtr>& out) {
  if (f->op == op) {
    flatten(f->left, op, out);
    flatten(f->right, op, out);
  } else {
    out.push_back(f);
  }
}

[[noreturn]] void unsupported(const std::string& why) {
  throw Error(ErrorCode::UnsupportedFragment, "formula is not a patrol specification: " + why);
}

}  // namespace

FormulaPtr parse_ltl(const std::string& text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw LtlSyntaxError(0, "empty formula");
  }
  return Parser(tokenize(text)).parse();
}

std::string print_ltl(const FormulaPtr& f) {
  std::string out;
  print_into(f, out);
  return out;
}

std::vector<std::string> propositions(const FormulaPtr& f) {
  std::vector<std::string> out;
  collect_atoms(f, out);
  return out;
}

void check_propositions(const FormulaPtr& f, const std::set<std::string>& declared) {
  for (const auto& a : propositions(f)) {
    if (!declared.contains(a)) throw Error(ErrorCode::ValidationError, "formula uses undeclared proposition '" + a + "'");
  }
}

PatrolSpec recognize_patrol(const FormulaPtr& f) {
  std::vector<FormulaPtr> conjuncts;
  flatten(f, Op::And, conjuncts);

  std::optional<std::string> init;
  std::vector<std::string> live;
  std::optional<std::string> safe;
  std::vector<std::string> targets;
  for (const auto& c : conjuncts) {
    if (c->op == Op::Atom) {
      if (init) unsupported("more than one initial proposition");
      init = c->atom;
    } else if (c->op == Op::Always && c->left->op == Op::Eventually && c->left->left->op == Op::Atom) {
      const std::string& a = c->left->left->atom;
      if (std::find(live.begin(), live.end(), a) != live.end()) unsupported("'" + a + "' repeated in liveness");
      live.push_back(a);
    } else if (c->op == Op::Always && c->left->op == Op::Until && c->left->left->op == Op::Atom) {
      if (safe) unsupported("more than one safety conjunct");
      safe = c->left->left->atom;
      std::vector<FormulaPtr> alts;
      flatten(c->left->right, Op::Or, alts);
      for (const auto& alt : alts) {
        if (alt->op != Op::Atom) unsupported("safety target must be a disjunction of propositions");
        targets.push_back(alt->atom);
      }
    } else {
      unsupported("unrecognized conjunct '" + print_ltl(c) + "'");
    }
  }
  if (!init) unsupported("missing initial proposition");
  if (live.empty()) unsupported("missing []<> liveness conjuncts");
  if (!safe) unsupported("missing [](free U ...) safety conjunct");
  if (std::set<std::string>(targets.begin(), targets.end()) != std::set<std::string>(live.begin(), live.end())) {
    unsupported("safety targets differ from the liveness regions");
  }
  auto it = std::find(live.begin(), live.end(), *init);
  if (it == live.end()) unsupported("initial proposition is not a liveness region");
  if (std::find(live.begin(), live.end(), *safe) != live.end()) unsupported("safe label is also a region");
  std::rotate(live.begin(), it, live.end());
  return {*init, live, *safe};
}

// ---------------------------------------------------------------------------
// Automata

void BuchiAutomaton::validate() const {
  const int n = static_cast<int>(states.size());
  auto in_range = [n](int s) { return s >= 0 && s < n; };
  if (initial.empty()) throw Error(ErrorCode::ValidationError, "automaton: no initial state");
  if (accepting.empty()) throw Error(ErrorCode::ValidationError, "automaton: no accepting state");
  for (int s : initial) {
    if (!in_range(s)) throw Error(ErrorCode::ValidationError, "automaton: initial state out of range");
  }
  for (int s : accepting) {
    if (!in_range(s)) throw Error(ErrorCode::ValidationError, "automaton: accepting state out of range");
  }
  for (const auto& t : transitions) {
    if (!in_range(t.from) || !in_range(t.to)) throw Error(ErrorCode::ValidationError, "automaton: transition out of range");
  }
}

std::vector<int> BuchiAutomaton::successors(int state, const Label& symbol) const {
  std::vector<int> out;
  for (const auto& t : transitions) {
    if (t.from == state && t.label == symbol) out.push_back(t.to);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<const Transition*> BuchiAutomaton::outgoing(int state) const {
  std::vector<const Transition*> out;
  for (const auto& t : transitions) {
    if (t.from == state) out.push_back(&t);
  }
  return out;
}

bool BuchiAutomaton::is_accepting(int state) const {
  return std::find(accepting.begin(), accepting.end(), state) != accepting.end();
}

BuchiAutomaton build_patrol_automaton(const std::vector<std::string>& liveness, const std::string& init_region,
                                      const std::string& safe_label) {
  if (liveness.empty()) throw Error(ErrorCode::EmptyLiveness, "patrol automaton needs at least one region");
  if (liveness.front() != init_region) {
    throw Error(ErrorCode::ValidationError, "init region '" + init_region + "' must be the first liveness region");
  }
  const int m = static_cast<int>(liveness.size());
  BuchiAutomaton a;
  // State 2k: just visited a_k. State 2k + 1: in transit after a_k.
  for (int k = 0; k < m; ++k) {
    a.states.push_back("visit_" + liveness[static_cast<std::size_t>(k)]);
    a.states.push_back("transit_" + liveness[static_cast<std::size_t>(k)]);
  }
  for (int k = 0; k < m; ++k) {
    a.transitions.push_back({2 * k, {safe_label}, 2 * k + 1});
    const int next = (k + 1) % m;
    a.transitions.push_back({2 * k + 1, {liveness[static_cast<std::size_t>(next)]}, 2 * next});
  }
  a.initial = {2 * m - 1};
  a.accepting = {0};
  return a;
}

namespace {

// Shortest path of at least one transition from any of `starts` into `target`.
std::optional<std::vector<RunStep>> shortest_steps(const BuchiAutomaton& a, const std::vector<int>& starts, int target) {
  const std::size_t n = a.states.size();
  std::vector<int> parent(n, -1);
  std::vector<const Transition*> via(n, nullptr);
  std::vector<bool> seen(n, false);
  std::deque<int> queue;
  for (int s : starts) {
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = true;
      queue.push_back(s);
    }
  }
  auto path_to = [&](int s) {
    std::vector<RunStep> steps;
    // Start states have no incoming edge recorded.
    for (int v = s; via[static_cast<std::size_t>(v)] != nullptr; v = parent[static_cast<std::size_t>(v)]) {
      steps.push_back({parent[static_cast<std::size_t>(v)], via[static_cast<std::size_t>(v)]->label});
    }
    std::reverse(steps.begin(), steps.end());
    return steps;
  };
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const Transition* t : a.outgoing(u)) {
      if (t->to == target) {
        std::vector<RunStep> steps = path_to(u);
        steps.push_back({u, t->label});
        return steps;
      }
      const auto v = static_cast<std::size_t>(t->to);
      if (!seen[v]) {
        seen[v] = true;
        parent[v] = u;
        via[v] = t;
        queue.push_back(t->to);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

AcceptingRun find_accepting_run(const BuchiAutomaton& a) {
  a.validate();
  std::vector<int> accepting = a.accepting;
  std::sort(accepting.begin(), accepting.end());
  std::optional<AcceptingRun> best;
  for (int f : accepting) {
    auto prefix = shortest_steps(a, a.initial, f);
    if (!prefix) continue;
    auto cycle = shortest_steps(a, {f}, f);
    if (!cycle) continue;
    if (!best || prefix->size() + cycle->size() < best->prefix.size() + best->cycle.size()) {
      best = AcceptingRun{std::move(*prefix), std::move(*cycle)};
    }
  }
  if (!best) throw Error(ErrorCode::NoAcceptingRun, "no accepting state is reachable on a cycle");
  return *best;
}

void AcceptingRun::check(const BuchiAutomaton& a) const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::ValidationError, "accepting run: " + why); };
  if (prefix.empty()) fail("empty prefix");
  if (cycle.empty()) fail("empty cycle");
  if (std::find(a.initial.begin(), a.initial.end(), prefix.front().state) == a.initial.end()) {
    fail("prefix does not start in an initial state");
  }
  if (!a.is_accepting(cycle.front().state)) fail("cycle does not start in an accepting state");
  auto check_chain = [&](const std::vector<RunStep>& steps, int end) {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const int to = i + 1 < steps.size() ? steps[i + 1].state : end;
      const auto succ = a.successors(steps[i].state, steps[i].label);
      if (std::find(succ.begin(), succ.end(), to) == succ.end()) fail("step " + std::to_string(i) + " is not a transition");
    }
  };
  check_chain(prefix, cycle.front().state);
  check_chain(cycle, cycle.front().state);
}

std::vector<TransitionRequest> run_to_transitions(const AcceptingRun& run, const std::string& safe_label) {
  std::vector<std::string> regions;
  for (const auto& step : run.cycle) {
    if (step.label.empty() || step.label.contains(safe_label)) continue;
    std::string name;
    for (const auto& l : step.label) name += (name.empty() ? "" : ",") + l;
    regions.push_back(name);
  }
  std::vector<TransitionRequest> out;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    out.push_back({regions[(k + regions.size() - 1) % regions.size()], regions[k]});
  }
  return out;
}

bool accepts_lasso(const BuchiAutomaton& a, const std::vector<Label>& prefix, const std::vector<Label>& cycle) {
  if (cycle.empty()) return false;
  std::vector<Label> word = prefix;
  word.insert(word.end(), cycle.begin(), cycle.end());
  const int len = static_cast<int>(word.size());
  const int p = static_cast<int>(prefix.size());
  const int n = static_cast<int>(a.states.size());
  auto id = [len](int s, int i) { return s * len + i; };
  auto step = [&](int node) {
    const int s = node / len, i = node % len;
    const int ni = i + 1 < len ? i + 1 : p;
    std::vector<int> out;
    for (int t : a.successors(s, word[static_cast<std::size_t>(i)])) out.push_back(id(t, ni));
    return out;
  };
  auto reach = [&](std::vector<int> frontier) {
    std::vector<bool> seen(static_cast<std::size_t>(n * len), false);
    for (int v : frontier) seen[static_cast<std::size_t>(v)] = true;
    while (!frontier.empty()) {
      const int u = frontier.back();
      frontier.pop_back();
      for (int v : step(u)) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = true;
          frontier.push_back(v);
        }
      }
    }
    return seen;
  };
  std::vector<int> starts;
  for (int s : a.initial) starts.push_back(id(s, 0));
  const auto reachable = reach(starts);
  for (int s : a.accepting) {
    for (int i = p; i < len; ++i) {
      const int node = id(s, i);
      if (!reachable[static_cast<std::size_t>(node)]) continue;
      if (reach(step(node))[static_cast<std::size_t>(node)]) return true;
    }
  }
  return false;
}

ReplayVerdict replay(const BuchiAutomaton& a, const std::vector<Label>& word, std::vector<int> start) {
  if (start.empty()) start = a.initial;
  std::set<int> current(start.begin(), start.end());
  for (std::size_t k = 0; k < word.size(); ++k) {
    std::set<int> next;
    for (int s : current) {
      for (int t : a.successors(s, word[k])) next.insert(t);
    }
    if (next.empty()) return {false, k};
    current = std::move(next);
  }
  return {};
}

}  // namespace funnelforge::logic
