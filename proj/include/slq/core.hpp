// Core formulae and the decision pipeline.
//
// Core(X, alpha) is the finite family { x = y, alloc(x), x |-> y,
// size >= k | x,y in X, k in [0, alpha] }. A core type fixes a polarity for
// every member; satisfiable core types admit a small canonical model. Every
// formula is translated into a Boolean combination of core literals by a
// bottom-up elimination of * and -o over core-type disjunctions, using the
// closed-form conjunctions boxstar and boxseptra.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "slq/formula.hpp"
#include "slq/semantics.hpp"

namespace slq {

// ---------------------------------------------------------------------------
// Core atoms and literals
// ---------------------------------------------------------------------------

struct CoreAtom {
  enum class K : std::uint8_t { Eq, Alloc, PointsTo, SizeGeq };

  K k = K::Eq;
  Variable a, b;      // Eq/PointsTo use a,b; Alloc uses a
  unsigned bound = 0; // SizeGeq

  static CoreAtom eq(Variable x, Variable y) { return {K::Eq, std::move(x), std::move(y), 0}; }
  static CoreAtom alloc(Variable x) { return {K::Alloc, std::move(x), Variable(), 0}; }
  static CoreAtom points_to(Variable x, Variable y) {
    return {K::PointsTo, std::move(x), std::move(y), 0};
  }
  static CoreAtom size_geq(unsigned k) { return {K::SizeGeq, Variable(), Variable(), k}; }

  Formula to_formula() const {
    switch (k) {
      case K::Eq:
        return Formula::eq(a, b);
      case K::Alloc:
        return Formula::alloc(a);
      case K::PointsTo:
        return Formula::points_to(a, b);
      case K::SizeGeq:
        return Formula::size_geq(bound);
    }
    throw std::logic_error("unreachable");
  }

  bool in_basis(const CoreBasis& basis) const {
    switch (k) {
      case K::Eq:
      case K::PointsTo:
        return basis.contains(a) && basis.contains(b);
      case K::Alloc:
        return basis.contains(a);
      case K::SizeGeq:
        return bound <= basis.alpha;
    }
    return false;
  }

  friend std::strong_ordering operator<=>(const CoreAtom&, const CoreAtom&) = default;
  friend bool operator==(const CoreAtom&, const CoreAtom&) = default;
};

struct CoreLiteral {
  CoreAtom atom;
  bool positive = true;

  Formula to_formula() const {
    Formula f = atom.to_formula();
    return positive ? f : Formula::neg(f);
  }

  // Canonical emission order: =, !=, alloc, not alloc, |->, not |->,
  // positive size, negative size; lexicographic within each family.
  std::tuple<int, CoreAtom> sort_key() const {
    int family = 0;
    switch (atom.k) {
      case CoreAtom::K::Eq:
        family = positive ? 0 : 1;
        break;
      case CoreAtom::K::Alloc:
        family = positive ? 2 : 3;
        break;
      case CoreAtom::K::PointsTo:
        family = positive ? 4 : 5;
        break;
      case CoreAtom::K::SizeGeq:
        family = positive ? 6 : 7;
        break;
    }
    return {family, atom};
  }

  friend bool operator<(const CoreLiteral& x, const CoreLiteral& y) {
    return x.sort_key() < y.sort_key();
  }
  friend bool operator==(const CoreLiteral&, const CoreLiteral&) = default;
};

using LiteralConjunction = std::vector<CoreLiteral>;  // read as a conjunction

inline void canonicalize(LiteralConjunction& lits) {
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
}

inline Formula conjunction_formula(const LiteralConjunction& lits) {
  if (lits.empty()) return Formula::truth();
  Formula acc = lits.front().to_formula();
  for (std::size_t i = 1; i < lits.size(); ++i)
    acc = Formula::conj(std::move(acc), lits[i].to_formula());
  return acc;
}

// True iff the conjunction contains a literal that is false in every state:
// x != x or not size >= 0.
inline bool has_flat_contradiction(const LiteralConjunction& lits) {
  for (const CoreLiteral& l : lits) {
    if (!l.positive && l.atom.k == CoreAtom::K::SizeGeq && l.atom.bound == 0) return true;
    if (!l.positive && l.atom.k == CoreAtom::K::Eq && l.atom.a == l.atom.b) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Core types
// ---------------------------------------------------------------------------

// A total polarity assignment over Core(X, alpha).
class CoreType {
 public:
  explicit CoreType(CoreBasis basis)
      : basis_(std::move(basis)),
        eq_(n() * n(), false),
        pto_(n() * n(), false),
        alloc_(n(), false),
        size_(basis_.alpha + 1, false) {}

  const CoreBasis& basis() const { return basis_; }
  std::size_t n() const { return basis_.vars.size(); }

  bool eq(std::size_t i, std::size_t j) const { return eq_[i * n() + j]; }
  bool pto(std::size_t i, std::size_t j) const { return pto_[i * n() + j]; }
  bool alloc(std::size_t i) const { return alloc_[i]; }
  bool size_geq(unsigned k) const { return size_[k]; }

  void set_eq(std::size_t i, std::size_t j, bool v) { eq_[i * n() + j] = v; }
  void set_pto(std::size_t i, std::size_t j, bool v) { pto_[i * n() + j] = v; }
  void set_alloc(std::size_t i, bool v) { alloc_[i] = v; }
  void set_size_geq(unsigned k, bool v) { size_[k] = v; }

  std::size_t index(const Variable& v) const {
    auto it = std::lower_bound(basis_.vars.begin(), basis_.vars.end(), v);
    if (it == basis_.vars.end() || !(*it == v))
      throw std::invalid_argument("variable outside core basis: " + v.name());
    return static_cast<std::size_t>(it - basis_.vars.begin());
  }

  bool positive(const CoreAtom& atom) const {
    switch (atom.k) {
      case CoreAtom::K::Eq:
        return eq(index(atom.a), index(atom.b));
      case CoreAtom::K::Alloc:
        return alloc(index(atom.a));
      case CoreAtom::K::PointsTo:
        return pto(index(atom.a), index(atom.b));
      case CoreAtom::K::SizeGeq:
        if (atom.bound > basis_.alpha)
          throw std::invalid_argument("size index outside core basis");
        return size_geq(atom.bound);
    }
    throw std::logic_error("unreachable");
  }

  // Largest k with size >= k positive (0 if none).
  unsigned maxsize() const {
    unsigned m = 0;
    for (unsigned k = 0; k <= basis_.alpha; ++k)
      if (size_[k]) m = k;
    return m;
  }

  // The literals of the type in canonical order (one per core formula).
  LiteralConjunction literals() const {
    LiteralConjunction out;
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j)
        out.push_back({CoreAtom::eq(basis_.vars[i], basis_.vars[j]), eq(i, j)});
    for (std::size_t i = 0; i < n(); ++i)
      out.push_back({CoreAtom::alloc(basis_.vars[i]), alloc(i)});
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j)
        out.push_back({CoreAtom::points_to(basis_.vars[i], basis_.vars[j]), pto(i, j)});
    for (unsigned k = 0; k <= basis_.alpha; ++k)
      out.push_back({CoreAtom::size_geq(k), size_[k]});
    std::sort(out.begin(), out.end());
    return out;
  }

  Formula to_formula() const { return conjunction_formula(literals()); }

  friend bool operator==(const CoreType&, const CoreType&) = default;

 private:
  CoreBasis basis_;
  std::vector<bool> eq_, pto_, alloc_;
  std::vector<bool> size_;
};

// Satisfiability of a core type: positive equalities must form an
// equivalence relation, alloc/|-> polarities must be invariant across it,
// x |-> y forces alloc(x), a class points to at most one class, and some
// heap size N must fit every size literal with N >= number of allocated
// classes.
inline bool core_type_sat(const CoreType& t) {
  const std::size_t n = t.n();
  if (t.basis().alpha < std::max<std::size_t>(1, n))
    throw std::invalid_argument("core_type_sat requires alpha >= max(1, |X|)");
  for (std::size_t i = 0; i < n; ++i)
    if (!t.eq(i, i)) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (t.eq(i, j) != t.eq(j, i)) return false;
      if (!t.eq(i, j)) continue;
      for (std::size_t k = 0; k < n; ++k)
        if (t.eq(j, k) && !t.eq(i, k)) return false;
      // polarity invariance under the equivalence
      if (t.alloc(i) != t.alloc(j)) return false;
      for (std::size_t k = 0; k < n; ++k) {
        if (t.pto(i, k) != t.pto(j, k)) return false;
        if (t.pto(k, i) != t.pto(k, j)) return false;
      }
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!t.pto(i, j)) continue;
      if (!t.alloc(i)) return false;
      for (std::size_t k = 0; k < n; ++k)
        if (t.pto(i, k) && !t.eq(j, k)) return false;
    }
  // count allocated classes: representatives are minimal indices
  std::size_t allocated_classes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool representative = true;
    for (std::size_t j = 0; j < i; ++j)
      if (t.eq(i, j)) representative = false;
    if (representative && t.alloc(i)) ++allocated_classes;
  }
  unsigned lower = std::max<unsigned>(static_cast<unsigned>(allocated_classes), t.maxsize());
  for (unsigned k = 0; k <= t.basis().alpha; ++k)
    if (!t.size_geq(k) && k <= lower) return false;
  return true;
}

// Builds the canonical small model of a satisfiable core type: with
// N = max(maxsize, #allocated classes), locations l_0..l_N host the heap
// (allocated classes on l_1.., garbage cells filling up to N cells, all
// dangling pointers to l_0) and unallocated classes live on fresh locations
// above l_N.
inline MemoryState core_type_model(const CoreType& t) {
  if (!core_type_sat(t)) throw std::invalid_argument("core_type_model: type is unsatisfiable");
  const std::size_t n = t.n();
  // class representative (minimal index) per variable
  std::vector<std::size_t> rep(n);
  std::vector<std::size_t> reps;  // in index order
  for (std::size_t i = 0; i < n; ++i) {
    rep[i] = i;
    for (std::size_t j = 0; j < i; ++j)
      if (t.eq(i, j)) {
        rep[i] = rep[j];
        break;
      }
    if (rep[i] == i) reps.push_back(i);
  }
  std::vector<std::size_t> alloc_reps, free_reps;
  for (std::size_t r : reps) (t.alloc(r) ? alloc_reps : free_reps).push_back(r);

  unsigned N = std::max<unsigned>(t.maxsize(), static_cast<unsigned>(alloc_reps.size()));
  std::map<std::size_t, Location> loc_of_rep;
  for (std::size_t i = 0; i < alloc_reps.size(); ++i)
    loc_of_rep[alloc_reps[i]] = static_cast<Location>(1 + i);
  for (std::size_t i = 0; i < free_reps.size(); ++i)
    loc_of_rep[free_reps[i]] = static_cast<Location>(N + 1 + i);

  MemoryState s;
  for (std::size_t i = 0; i < n; ++i) s.store[t.basis().vars[i]] = loc_of_rep[rep[i]];
  for (std::size_t i = 0; i < alloc_reps.size(); ++i) {
    std::size_t r = alloc_reps[i];
    Location target = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (t.pto(r, j)) {
        target = loc_of_rep[rep[j]];
        break;
      }
    s.heap[static_cast<Location>(1 + i)] = target;
  }
  for (Location g = static_cast<Location>(alloc_reps.size() + 1); g <= N; ++g) s.heap[g] = 0;
  return s;
}

// All satisfiable core types over the basis, in a fixed canonical order.
// Satisfiable types are exactly the images of tuples (partition of X,
// allocated classes D, partial pointer map on D, size threshold m), which
// assigns whole literal families at once instead of completing literal by
// literal.
inline std::vector<CoreType> enumerate_core_types(const CoreBasis& basis) {
  const std::size_t n = basis.vars.size();
  std::vector<CoreType> out;
  detail::for_each_partition(n, [&](const std::vector<std::size_t>& cls, std::size_t classes) {
    std::vector<std::vector<std::size_t>> members(classes);
    for (std::size_t i = 0; i < n; ++i) members[cls[i]].push_back(i);
    for (std::uint32_t dmask = 0; dmask < (1u << classes); ++dmask) {
      std::size_t dsize = static_cast<std::size_t>(__builtin_popcount(dmask));
      std::vector<std::size_t> dclasses;
      for (std::size_t c = 0; c < classes; ++c)
        if ((dmask >> c) & 1u) dclasses.push_back(c);
      // pointer map odometer: 0 = undefined, i+1 = class i
      std::vector<std::size_t> odo(dclasses.size(), 0);
      for (;;) {
        // Size thresholds: positives are exactly k <= m. Any m below alpha
        // pins N = m, so it needs m >= |D|; m = alpha leaves N open upward.
        for (unsigned m = 0; m <= basis.alpha; ++m) {
          if (m != basis.alpha && m < dsize) continue;
          CoreType t(basis);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) t.set_eq(i, j, cls[i] == cls[j]);
          for (std::size_t i = 0; i < n; ++i) t.set_alloc(i, (dmask >> cls[i]) & 1u);
          for (std::size_t d = 0; d < dclasses.size(); ++d) {
            if (odo[d] == 0) continue;
            std::size_t target = odo[d] - 1;
            for (std::size_t i : members[dclasses[d]])
              for (std::size_t j : members[target]) t.set_pto(i, j, true);
          }
          for (unsigned k = 0; k <= basis.alpha; ++k) t.set_size_geq(k, k <= m);
          out.push_back(std::move(t));
        }
        std::size_t i = odo.size();
        bool carried = true;
        while (i-- > 0) {
          if (++odo[i] <= classes) {
            carried = false;
            break;
          }
          odo[i] = 0;
        }
        if (carried) break;
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Normalized forms
// ---------------------------------------------------------------------------

// A Boolean combination of core literals over a basis. The body uses the
// ordinary Formula representation restricted to core atoms, True/False and
// the propositional connectives.
struct NormalizedForm {
  CoreBasis basis;
  Formula body;
};

namespace detail {

inline bool eval_core_body(const Formula& g, const CoreType& t) {
  switch (g.kind()) {
    case Kind::True:
      return true;
    case Kind::False:
      return false;
    case Kind::Eq:
      return t.positive(CoreAtom::eq(g.var(), g.var2()));
    case Kind::Alloc:
      return t.positive(CoreAtom::alloc(g.var()));
    case Kind::PointsTo:
      return t.positive(CoreAtom::points_to(g.var(), g.var2()));
    case Kind::SizeGeq:
      return t.positive(CoreAtom::size_geq(g.bound()));
    case Kind::Not:
      return !eval_core_body(g.child(), t);
    case Kind::And:
      return eval_core_body(g.left(), t) && eval_core_body(g.right(), t);
    case Kind::Or:
      return eval_core_body(g.left(), t) || eval_core_body(g.right(), t);
    case Kind::Implies:
      return !eval_core_body(g.left(), t) || eval_core_body(g.right(), t);
    case Kind::Iff:
      return eval_core_body(g.left(), t) == eval_core_body(g.right(), t);
    default:
      throw std::invalid_argument("normalized body contains a non-core connective");
  }
}

}  // namespace detail

// The satisfiable core types over g.basis whose literals entail g; their
// disjunction is logically equivalent to g.
inline std::vector<CoreType> to_core_type_dnf(const NormalizedForm& g) {
  std::vector<CoreType> out;
  for (CoreType& t : enumerate_core_types(g.basis))
    if (detail::eval_core_body(g.body, t)) out.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// boxstar / boxseptra
// ---------------------------------------------------------------------------

namespace detail {

inline void check_box_preconditions(const CoreType& t1, const CoreType& t2, const char* who) {
  if (!(t1.basis() == t2.basis()))
    throw std::invalid_argument(std::string(who) + ": operand bases differ");
  if (t1.basis().alpha < t1.n())
    throw std::invalid_argument(std::string(who) + ": requires alpha >= |X|");
  if (!core_type_sat(t1) || !core_type_sat(t2))
    throw std::invalid_argument(std::string(who) + ": operands must be satisfiable core types");
}

}  // namespace detail

// The closed-form conjunction equivalent to t1 * t2, with literals inside
// Core(X, 2 alpha):
//   (i)    every =/!= literal of either operand
//   (ii)   alloc(x) positive in either
//   (iii)  not alloc(x) negative in both
//   (iv)   not x |-> y whenever one operand has alloc(x) and not x |-> y
//   (v)    x != x whenever alloc(x) is positive in both
//   (vi)   size >= k1+k2 for positive size k1 of t1 and k2 of t2
//   (vii)  x |-> y positive in either
//   (viii) not size >= k1+k2-1 (monus) for negative size k1 of t1, k2 of t2
inline LiteralConjunction boxstar(const CoreType& t1, const CoreType& t2) {
  detail::check_box_preconditions(t1, t2, "boxstar");
  const CoreBasis& basis = t1.basis();
  const std::size_t n = t1.n();
  LiteralConjunction out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CoreAtom e = CoreAtom::eq(basis.vars[i], basis.vars[j]);
      if (t1.eq(i, j) || t2.eq(i, j)) out.push_back({e, true});
      if (!t1.eq(i, j) || !t2.eq(i, j)) out.push_back({e, false});
    }
  for (std::size_t i = 0; i < n; ++i) {
    CoreAtom a = CoreAtom::alloc(basis.vars[i]);
    if (t1.alloc(i) || t2.alloc(i)) out.push_back({a, true});
    if (!t1.alloc(i) && !t2.alloc(i)) out.push_back({a, false});
    if (t1.alloc(i) && t2.alloc(i))
      out.push_back({CoreAtom::eq(basis.vars[i], basis.vars[i]), false});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CoreAtom p = CoreAtom::points_to(basis.vars[i], basis.vars[j]);
      if (t1.pto(i, j) || t2.pto(i, j)) out.push_back({p, true});
      if ((t1.alloc(i) && !t1.pto(i, j)) || (t2.alloc(i) && !t2.pto(i, j)))
        out.push_back({p, false});
    }
  for (unsigned k1 = 0; k1 <= basis.alpha; ++k1)
    for (unsigned k2 = 0; k2 <= basis.alpha; ++k2) {
      if (t1.size_geq(k1) && t2.size_geq(k2))
        out.push_back({CoreAtom::size_geq(k1 + k2), true});
      if (!t1.size_geq(k1) && !t2.size_geq(k2)) {
        unsigned k = k1 + k2 >= 1 ? k1 + k2 - 1 : 0;  // monus
        out.push_back({CoreAtom::size_geq(k), false});
      }
    }
  canonicalize(out);
  return out;
}

// The closed-form conjunction equivalent to t1 -o t2 (some heap satisfying
// t1 extends the current one into a heap satisfying t2); literals stay in
// Core(X, alpha):
//   (i)    every =/!= literal of either operand
//   (ii)   alloc(x) when not alloc(x) in t1 and alloc(x) in t2
//   (iii)  every not alloc(x) of t2
//   (iv)   not alloc(x) when alloc(x) in t1
//   (v)    every not x |-> y of t2
//   (vi)   x |-> y when not alloc(x) in t1 and x |-> y in t2
//   (vii)  x != x when alloc(x), not x |-> y in t1 and x |-> y in t2
//   (viii) x != x when x |-> y in t1 and not x |-> y in t2
//   (ix)   x != x when alloc(x) in t1 and not alloc(x) in t2
//   (x)    size >= k2+1-k1 (monus) when not size >= k1 in t1, size >= k2 in t2
//   (xi)   not size >= k2-k1 (monus) when size >= k1 in t1, not size >= k2 in t2
inline LiteralConjunction boxseptra(const CoreType& t1, const CoreType& t2) {
  detail::check_box_preconditions(t1, t2, "boxseptra");
  const CoreBasis& basis = t1.basis();
  const std::size_t n = t1.n();
  const unsigned alpha = basis.alpha;
  LiteralConjunction out;
  auto neq_self = [&](std::size_t i) {
    out.push_back({CoreAtom::eq(basis.vars[i], basis.vars[i]), false});
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CoreAtom e = CoreAtom::eq(basis.vars[i], basis.vars[j]);
      if (t1.eq(i, j) || t2.eq(i, j)) out.push_back({e, true});
      if (!t1.eq(i, j) || !t2.eq(i, j)) out.push_back({e, false});
    }
  for (std::size_t i = 0; i < n; ++i) {
    CoreAtom a = CoreAtom::alloc(basis.vars[i]);
    if (!t1.alloc(i) && t2.alloc(i)) out.push_back({a, true});   // (ii)
    if (!t2.alloc(i)) out.push_back({a, false});                 // (iii)
    if (t1.alloc(i)) out.push_back({a, false});                  // (iv)
    if (t1.alloc(i) && !t2.alloc(i)) neq_self(i);                // (ix)
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CoreAtom p = CoreAtom::points_to(basis.vars[i], basis.vars[j]);
      if (!t2.pto(i, j)) out.push_back({p, false});                        // (v)
      if (!t1.alloc(i) && t2.pto(i, j)) out.push_back({p, true});          // (vi)
      if (t1.alloc(i) && !t1.pto(i, j) && t2.pto(i, j)) neq_self(i);       // (vii)
      if (t1.pto(i, j) && !t2.pto(i, j)) neq_self(i);                      // (viii)
    }
  for (unsigned k1 = 0; k1 <= alpha; ++k1)
    for (unsigned k2 = 0; k2 <= alpha; ++k2) {
      if (!t1.size_geq(k1) && t2.size_geq(k2))
        out.push_back({CoreAtom::size_geq(k2 + 1 >= k1 ? k2 + 1 - k1 : 0), true});   // (x)
      if (t1.size_geq(k1) && !t2.size_geq(k2))
        out.push_back({CoreAtom::size_geq(k2 >= k1 ? k2 - k1 : 0), false});          // (xi)
    }
  canonicalize(out);
  return out;
}

// ---------------------------------------------------------------------------
// Elimination and normalization
// ---------------------------------------------------------------------------

// Per-elimination statistics, exposed through the CLI --trace flag.
struct NormalizeTrace {
  struct Step {
    char op;  // '*' or 'o'
    std::size_t left_types = 0;
    std::size_t right_types = 0;
    std::size_t cubes = 0;
  };
  std::vector<Step> steps;
};

namespace detail {

inline CoreBasis common_basis(const CoreBasis& b1, const CoreBasis& b2) {
  VariableSet xs(b1.vars.begin(), b1.vars.end());
  xs.insert(b2.vars.begin(), b2.vars.end());
  unsigned alpha = std::max<unsigned>({static_cast<unsigned>(xs.size()), b1.alpha, b2.alpha, 1});
  return CoreBasis(std::move(xs), alpha);
}

inline Formula disjunction_of_cubes(const std::set<LiteralConjunction>& cubes) {
  Formula acc;
  for (const LiteralConjunction& cube : cubes) {
    Formula c = conjunction_formula(cube);
    acc = acc.is_null() ? std::move(c) : Formula::disj(std::move(acc), std::move(c));
  }
  return acc.is_null() ? Formula::falsity() : acc;
}

}  // namespace detail

// Eliminates one separating conjunction of normalized forms: both operands
// are padded to the common basis (X1 u X2, max(|X|, a1, a2)), turned into
// core-type disjunctions, and combined pairwise through boxstar. The empty
// disjunction is False; cubes with a flatly contradictory literal are
// dropped (they denote False). The resulting literals live in Core(X, 2a).
inline NormalizedForm eliminate_star(const NormalizedForm& g1, const NormalizedForm& g2,
                                     NormalizeTrace* trace = nullptr) {
  CoreBasis common = detail::common_basis(g1.basis, g2.basis);
  std::vector<CoreType> ts1 = to_core_type_dnf({common, g1.body});
  std::vector<CoreType> ts2 = to_core_type_dnf({common, g2.body});
  std::set<LiteralConjunction> cubes;
  for (const CoreType& t1 : ts1)
    for (const CoreType& t2 : ts2) {
      LiteralConjunction cube = boxstar(t1, t2);
      if (!has_flat_contradiction(cube)) cubes.insert(std::move(cube));
    }
  if (trace) trace->steps.push_back({'*', ts1.size(), ts2.size(), cubes.size()});
  CoreBasis result_basis = common;
  result_basis.alpha = 2 * common.alpha;
  return {std::move(result_basis), detail::disjunction_of_cubes(cubes)};
}

// Eliminates one septraction; same scheme with boxseptra. The basis is
// preserved (boxseptra never raises a size index above alpha).
inline NormalizedForm eliminate_septraction(const NormalizedForm& g1, const NormalizedForm& g2,
                                            NormalizeTrace* trace = nullptr) {
  CoreBasis common = detail::common_basis(g1.basis, g2.basis);
  std::vector<CoreType> ts1 = to_core_type_dnf({common, g1.body});
  std::vector<CoreType> ts2 = to_core_type_dnf({common, g2.body});
  std::set<LiteralConjunction> cubes;
  for (const CoreType& t1 : ts1)
    for (const CoreType& t2 : ts2) {
      LiteralConjunction cube = boxseptra(t1, t2);
      if (!has_flat_contradiction(cube)) cubes.insert(std::move(cube));
    }
  if (trace) trace->steps.push_back({'o', ts1.size(), ts2.size(), cubes.size()});
  return {common, detail::disjunction_of_cubes(cubes)};
}

// The bottom-up translation into a Boolean combination of core literals:
// atoms map to core literals (emp to not size >= 1), Boolean structure is
// kept, a * b and a -o b go through the eliminations, and a -* b is first
// rewritten as not (a -o not b).
inline NormalizedForm normalize(const Formula& f, NormalizeTrace* trace = nullptr) {
  switch (f.kind()) {
    case Kind::Emp:
      return {CoreBasis({}, 1), Formula::neg(Formula::size_geq(1))};
    case Kind::True:
    case Kind::False:
      return {CoreBasis({}, 1), f};
    case Kind::Eq:
    case Kind::PointsTo:
    case Kind::Alloc:
      return {CoreBasis(free_vars(f), std::max<unsigned>(1, free_vars(f).size())), f};
    case Kind::SizeGeq:
      return {CoreBasis({}, std::max<unsigned>(1, f.bound())), f};
    case Kind::Not: {
      NormalizedForm g = normalize(f.child(), trace);
      return {g.basis, Formula::neg(g.body)};
    }
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff: {
      NormalizedForm a = normalize(f.left(), trace);
      NormalizedForm b = normalize(f.right(), trace);
      CoreBasis common = detail::common_basis(a.basis, b.basis);
      Formula body;
      switch (f.kind()) {
        case Kind::And:
          body = Formula::conj(a.body, b.body);
          break;
        case Kind::Or:
          body = Formula::disj(a.body, b.body);
          break;
        case Kind::Implies:
          body = Formula::implies(a.body, b.body);
          break;
        default:
          body = Formula::iff(a.body, b.body);
          break;
      }
      return {std::move(common), std::move(body)};
    }
    case Kind::Star:
      return eliminate_star(normalize(f.left(), trace), normalize(f.right(), trace), trace);
    case Kind::Septraction:
      return eliminate_septraction(normalize(f.left(), trace), normalize(f.right(), trace), trace);
    case Kind::Wand: {
      NormalizedForm a = normalize(f.left(), trace);
      NormalizedForm nb = normalize(Formula::neg(f.right()), trace);
      NormalizedForm sep = eliminate_septraction(a, nb, trace);
      return {sep.basis, Formula::neg(sep.body)};
    }
  }
  throw std::logic_error("normalize: unreachable");
}

// ---------------------------------------------------------------------------
// Decision procedures
// ---------------------------------------------------------------------------

// X = free variables and alpha computed bottom-up: 1 for the heap-free
// atoms, max(k, 1) for size >= k, max over Boolean connectives and -*/-o,
// sum at *, finally lifted to at least max(|X|, 1).
inline CoreBasis compute_basis(const Formula& f) {
  auto alpha = [](auto&& self, const Formula& g) -> unsigned {
    switch (g.kind()) {
      case Kind::Emp:
      case Kind::True:
      case Kind::False:
      case Kind::Eq:
      case Kind::PointsTo:
      case Kind::Alloc:
        return 1;
      case Kind::SizeGeq:
        return std::max<unsigned>(g.bound(), 1);
      case Kind::Not:
        return self(self, g.child());
      case Kind::Star:
        return self(self, g.left()) + self(self, g.right());
      default:
        return std::max(self(self, g.left()), self(self, g.right()));
    }
  };
  VariableSet xs = free_vars(f);
  unsigned a = alpha(alpha, f);
  a = std::max<unsigned>({a, static_cast<unsigned>(xs.size()), 1});
  return CoreBasis(std::move(xs), a);
}

// Enumeration bounds under which brute_sat and satisfies are exact for f.
inline EnumerationBounds exact_bounds(const CoreBasis& basis) {
  EnumerationBounds b;
  b.max_heap_size = basis.alpha;
  b.location_universe = static_cast<Location>(basis.vars.size() + basis.alpha + 1);
  b.wand_extension_budget = basis.alpha;
  b.fresh_locations = basis.alpha + basis.vars.size() + 1;
  return b;
}

struct SatResult {
  bool sat = false;
  std::optional<MemoryState> witness;  // set iff sat
  CoreBasis basis;
  std::size_t cube_count = 0;  // satisfiable core types of the normal form
};

struct ValidityResult {
  bool valid = false;
  std::optional<MemoryState> countermodel;  // set iff not valid
  CoreBasis basis;
};

// SAT iff the normal form has a satisfiable core type; the witness is the
// canonical model of the first one, revalidated against f itself.
inline SatResult decide_sat(const Formula& f, NormalizeTrace* trace = nullptr) {
  NormalizedForm n = normalize(f, trace);
  std::vector<CoreType> types = to_core_type_dnf(n);
  SatResult r;
  r.basis = n.basis;
  r.cube_count = types.size();
  if (types.empty()) return r;
  r.sat = true;
  MemoryState witness = core_type_model(types.front());
  if (!satisfies(witness, f, exact_bounds(compute_basis(f))))
    throw std::logic_error("decide_sat: witness failed validation");
  r.witness = std::move(witness);
  return r;
}

// VALID iff not f is unsatisfiable; otherwise the witness of not f is a
// validated countermodel.
inline ValidityResult decide_valid(const Formula& f, NormalizeTrace* trace = nullptr) {
  SatResult s = decide_sat(Formula::neg(f), trace);
  ValidityResult r;
  r.basis = s.basis;
  r.valid = !s.sat;
  if (s.sat) r.countermodel = std::move(s.witness);
  return r;
}

// Validity of f -> g; the countermodel, if any, satisfies f but not g.
inline ValidityResult entails(const Formula& f, const Formula& g,
                              NormalizeTrace* trace = nullptr) {
  return decide_valid(Formula::implies(f, g), trace);
}

}  // namespace slq
