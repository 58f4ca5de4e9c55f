// Abstract syntax for quantifier-free separation logic with * and -*,
// plus the core-formula atoms alloc(x) and size >= k.
//
// Formulas are immutable values; copies share structure and all operations
// here are pure, so they can be freely passed between threads.
#pragma once

#include <algorithm>
#include <cassert>
#include <cctype>
#include <compare>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace slq {

// A program variable. Names match [a-zA-Z][a-zA-Z0-9_']* and equality is
// plain string equality.
class Variable {
 public:
  Variable() = default;
  explicit Variable(std::string name) : name_(std::move(name)) {
    if (!valid_name(name_))
      throw std::invalid_argument("invalid variable name: '" + name_ + "'");
  }

  const std::string& name() const { return name_; }

  static bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '\'')
        return false;
    return true;
  }

  friend bool operator==(const Variable& a, const Variable& b) { return a.name_ == b.name_; }
  friend std::strong_ordering operator<=>(const Variable& a, const Variable& b) {
    return a.name_ <=> b.name_;
  }

 private:
  std::string name_;
};

using VariableSet = std::set<Variable>;  // ordered, hence canonical iteration

enum class Kind : std::uint8_t {
  Emp,
  True,
  False,
  Eq,        // x = y
  PointsTo,  // x |-> y
  Alloc,     // alloc(x)
  SizeGeq,   // size >= k
  Not,
  And,
  Or,
  Implies,
  Iff,
  Star,        // separating conjunction
  Wand,        // separating implication
  Septraction  // -o, i.e. not (a -* not b)
};

inline bool is_atom(Kind k) {
  switch (k) {
    case Kind::Emp:
    case Kind::True:
    case Kind::False:
    case Kind::Eq:
    case Kind::PointsTo:
    case Kind::Alloc:
    case Kind::SizeGeq:
      return true;
    default:
      return false;
  }
}

inline bool is_binary(Kind k) { return !is_atom(k) && k != Kind::Not; }

class Formula {
 public:
  Formula() = default;  // null formula; only valid as a placeholder

  static Formula emp() { return make(Kind::Emp); }
  static Formula truth() { return make(Kind::True); }
  static Formula falsity() { return make(Kind::False); }
  static Formula eq(Variable x, Variable y) {
    Node n{Kind::Eq};
    n.a = std::move(x);
    n.b = std::move(y);
    return wrap(std::move(n));
  }
  static Formula points_to(Variable x, Variable y) {
    Node n{Kind::PointsTo};
    n.a = std::move(x);
    n.b = std::move(y);
    return wrap(std::move(n));
  }
  static Formula alloc(Variable x) {
    Node n{Kind::Alloc};
    n.a = std::move(x);
    return wrap(std::move(n));
  }
  static Formula size_geq(unsigned k) {
    Node n{Kind::SizeGeq};
    n.bound = k;
    return wrap(std::move(n));
  }
  // size = k, which abbreviates size >= k /\ not size >= k+1.
  static Formula size_eq(unsigned k) {
    return conj(size_geq(k), neg(size_geq(k + 1)));
  }

  static Formula neg(Formula a) { return unary(Kind::Not, std::move(a)); }
  static Formula conj(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
  static Formula implies(Formula a, Formula b) {
    return binary(Kind::Implies, std::move(a), std::move(b));
  }
  static Formula iff(Formula a, Formula b) { return binary(Kind::Iff, std::move(a), std::move(b)); }
  static Formula star(Formula a, Formula b) { return binary(Kind::Star, std::move(a), std::move(b)); }
  static Formula wand(Formula a, Formula b) { return binary(Kind::Wand, std::move(a), std::move(b)); }
  static Formula septraction(Formula a, Formula b) {
    return binary(Kind::Septraction, std::move(a), std::move(b));
  }

  bool is_null() const { return node_ == nullptr; }
  Kind kind() const { return node_->kind; }

  const Variable& var() const { return node_->a; }    // Eq/PointsTo/Alloc
  const Variable& var2() const { return node_->b; }   // Eq/PointsTo
  unsigned bound() const { return node_->bound; }     // SizeGeq

  const Formula& left() const { return node_->kids[0]; }
  const Formula& right() const { return node_->kids[1]; }
  const Formula& child() const { return node_->kids[0]; }  // Not

  std::size_t connective_count() const {
    if (is_atom(kind())) return 0;
    std::size_t n = 1;
    for (const Formula& k : node_->kids) n += k.connective_count();
    return n;
  }

  // Structural comparison; a total order used for canonical sorting.
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    if (auto c = a.kind() <=> b.kind(); c != 0) return c;
    switch (a.kind()) {
      case Kind::Emp:
      case Kind::True:
      case Kind::False:
        return std::strong_ordering::equal;
      case Kind::Eq:
      case Kind::PointsTo:
        if (auto c = a.var() <=> b.var(); c != 0) return c;
        return a.var2() <=> b.var2();
      case Kind::Alloc:
        return a.var() <=> b.var();
      case Kind::SizeGeq:
        return a.bound() <=> b.bound();
      case Kind::Not:
        return a.child() <=> b.child();
      default:
        if (auto c = a.left() <=> b.left(); c != 0) return c;
        return a.right() <=> b.right();
    }
  }
  friend bool operator==(const Formula& a, const Formula& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  struct Node {
    Kind kind = Kind::True;
    Variable a, b;
    unsigned bound = 0;
    std::vector<Formula> kids;
  };

  static Formula wrap(Node n) {
    Formula f;
    f.node_ = std::make_shared<const Node>(std::move(n));
    return f;
  }
  static Formula make(Kind k) { return wrap(Node{k}); }
  static Formula unary(Kind k, Formula a) {
    assert(!a.is_null());
    Node n{k};
    n.kids = {std::move(a)};
    return wrap(std::move(n));
  }
  static Formula binary(Kind k, Formula a, Formula b) {
    assert(!a.is_null() && !b.is_null());
    Node n{k};
    n.kids = {std::move(a), std::move(b)};
    return wrap(std::move(n));
  }

  std::shared_ptr<const Node> node_;
};

// All variables occurring in f, canonically (lexicographically) ordered.
inline void collect_vars(const Formula& f, VariableSet& out) {
  switch (f.kind()) {
    case Kind::Eq:
    case Kind::PointsTo:
      out.insert(f.var());
      out.insert(f.var2());
      return;
    case Kind::Alloc:
      out.insert(f.var());
      return;
    case Kind::Emp:
    case Kind::True:
    case Kind::False:
    case Kind::SizeGeq:
      return;
    case Kind::Not:
      collect_vars(f.child(), out);
      return;
    default:
      collect_vars(f.left(), out);
      collect_vars(f.right(), out);
      return;
  }
}

inline VariableSet free_vars(const Formula& f) {
  VariableSet out;
  collect_vars(f, out);
  return out;
}

// Replaces every occurrence of `from` by `to`.
inline Formula substitute(const Formula& f, const Variable& from, const Variable& to) {
  auto sub = [&](const Variable& v) { return v == from ? to : v; };
  switch (f.kind()) {
    case Kind::Eq:
      return Formula::eq(sub(f.var()), sub(f.var2()));
    case Kind::PointsTo:
      return Formula::points_to(sub(f.var()), sub(f.var2()));
    case Kind::Alloc:
      return Formula::alloc(sub(f.var()));
    case Kind::Emp:
    case Kind::True:
    case Kind::False:
    case Kind::SizeGeq:
      return f;
    case Kind::Not:
      return Formula::neg(substitute(f.child(), from, to));
    case Kind::And:
      return Formula::conj(substitute(f.left(), from, to), substitute(f.right(), from, to));
    case Kind::Or:
      return Formula::disj(substitute(f.left(), from, to), substitute(f.right(), from, to));
    case Kind::Implies:
      return Formula::implies(substitute(f.left(), from, to), substitute(f.right(), from, to));
    case Kind::Iff:
      return Formula::iff(substitute(f.left(), from, to), substitute(f.right(), from, to));
    case Kind::Star:
      return Formula::star(substitute(f.left(), from, to), substitute(f.right(), from, to));
    case Kind::Wand:
      return Formula::wand(substitute(f.left(), from, to), substitute(f.right(), from, to));
    case Kind::Septraction:
      return Formula::septraction(substitute(f.left(), from, to), substitute(f.right(), from, to));
  }
  throw std::logic_error("substitute: unreachable");
}

// Rewrites every shortcut into the kernel connectives, so that the result
// contains only Emp, True, False, Eq, PointsTo, Not, And, Star and Wand:
//
//   alloc(x)       ~> x |-> x -* false
//   size >= 0      ~> true
//   size >= 1      ~> not emp
//   size >= k+1    ~> not emp * size >= k        (recursively)
//   a -o b         ~> not (a -* not b)
//   a \/ b         ~> not (not a /\ not b)
//   a -> b         ~> not (a /\ not b)
//   a <-> b        ~> not (a /\ not b) /\ not (b /\ not a)
inline Formula expand_shortcuts(const Formula& f) {
  switch (f.kind()) {
    case Kind::Emp:
    case Kind::True:
    case Kind::False:
    case Kind::Eq:
    case Kind::PointsTo:
      return f;
    case Kind::Alloc:
      return Formula::wand(Formula::points_to(f.var(), f.var()), Formula::falsity());
    case Kind::SizeGeq: {
      unsigned k = f.bound();
      if (k == 0) return Formula::truth();
      Formula acc = Formula::neg(Formula::emp());
      for (unsigned i = 1; i < k; ++i) acc = Formula::star(Formula::neg(Formula::emp()), acc);
      return acc;
    }
    case Kind::Not:
      return Formula::neg(expand_shortcuts(f.child()));
    case Kind::And:
      return Formula::conj(expand_shortcuts(f.left()), expand_shortcuts(f.right()));
    case Kind::Star:
      return Formula::star(expand_shortcuts(f.left()), expand_shortcuts(f.right()));
    case Kind::Wand:
      return Formula::wand(expand_shortcuts(f.left()), expand_shortcuts(f.right()));
    case Kind::Septraction:
      return Formula::neg(Formula::wand(expand_shortcuts(f.left()),
                                        Formula::neg(expand_shortcuts(f.right()))));
    case Kind::Or:
      return Formula::neg(Formula::conj(Formula::neg(expand_shortcuts(f.left())),
                                        Formula::neg(expand_shortcuts(f.right()))));
    case Kind::Implies:
      return Formula::neg(
          Formula::conj(expand_shortcuts(f.left()), Formula::neg(expand_shortcuts(f.right()))));
    case Kind::Iff: {
      Formula a = expand_shortcuts(f.left());
      Formula b = expand_shortcuts(f.right());
      return Formula::conj(Formula::neg(Formula::conj(a, Formula::neg(b))),
                           Formula::neg(Formula::conj(b, Formula::neg(a))));
    }
  }
  throw std::logic_error("expand_shortcuts: unreachable");
}

// The variable set X and size bound alpha delimiting the core formulae
// Core(X, alpha) = { x = y, alloc(x), x |-> y, size >= k | x,y in X, k <= alpha }.
struct CoreBasis {
  std::vector<Variable> vars;  // sorted, duplicate-free
  unsigned alpha = 1;

  CoreBasis() = default;
  CoreBasis(VariableSet xs, unsigned a) : vars(xs.begin(), xs.end()), alpha(a) {
    if (alpha < 1) throw std::invalid_argument("core basis requires alpha >= 1");
  }

  bool contains(const Variable& v) const {
    return std::binary_search(vars.begin(), vars.end(), v);
  }

  friend bool operator==(const CoreBasis&, const CoreBasis&) = default;
};

}  // namespace slq
