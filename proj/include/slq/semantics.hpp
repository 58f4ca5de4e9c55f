// Concrete heaplet semantics: memory states, the satisfaction relation with
// bounded quantification for -* / -o, exhaustive state enumeration, and the
// two brute-force oracles (brute_sat over states, core_abstract_sat over
// store/heap abstractions) used to validate the rest of the toolkit.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slq/formula.hpp"

namespace slq {

using Location = std::uint32_t;

// A store (variables to locations) plus a finite partial heap (locations to
// locations). Locations are plain naturals.
struct MemoryState {
  std::map<Variable, Location> store;
  std::map<Location, Location> heap;

  friend bool operator==(const MemoryState&, const MemoryState&) = default;
};

inline std::string to_text(const MemoryState& s) {
  std::string out = "store:";
  bool first = true;
  for (const auto& [v, l] : s.store) {
    out += first ? " " : ", ";
    out += v.name() + "->" + std::to_string(l);
    first = false;
  }
  if (first) out += " (empty)";
  out += " ; heap:";
  first = true;
  for (const auto& [a, b] : s.heap) {
    out += first ? " " : ", ";
    out += std::to_string(a) + "->" + std::to_string(b);
    first = false;
  }
  if (first) out += " (empty)";
  return out;
}

// Bounds for exhaustive enumeration and for the -*/-o extension search.
// Evaluation of * and the propositional connectives is always exact; the
// -*/-o clauses are exact whenever wand_extension_budget is at least the
// normalization bound of the operand and fresh_locations at least that
// bound + |free variables| + 1.
struct EnumerationBounds {
  std::size_t max_heap_size = 2;
  Location location_universe = 4;
  std::size_t wand_extension_budget = 2;
  std::size_t fresh_locations = 2;

  void validate(std::size_t var_count) const {
    if (location_universe < var_count + max_heap_size)
      throw std::invalid_argument("location_universe must be >= |vars| + max_heap_size");
    if (fresh_locations < 1) throw std::invalid_argument("fresh_locations must be >= 1");
  }
};

namespace detail {

using Cell = std::pair<Location, Location>;
using CellVec = std::vector<Cell>;  // sorted by address, addresses distinct

inline CellVec cells_of(const std::map<Location, Location>& heap) {
  return CellVec(heap.begin(), heap.end());
}

inline std::optional<Location> lookup(const CellVec& cells, Location addr) {
  auto it = std::lower_bound(cells.begin(), cells.end(), addr,
                             [](const Cell& c, Location a) { return c.first < a; });
  if (it == cells.end() || it->first != addr) return std::nullopt;
  return it->second;
}

class Evaluator {
 public:
  Evaluator(const std::map<Variable, Location>& store, const EnumerationBounds& bounds)
      : store_(store), bounds_(bounds) {}

  bool eval(const CellVec& cells, const Formula& f) { return eval_mask(cells, full_mask(cells), f); }

 private:
  static std::uint32_t full_mask(const CellVec& cells) {
    if (cells.size() > 25) throw std::invalid_argument("heap too large for exhaustive evaluation");
    return static_cast<std::uint32_t>((1u << cells.size()) - 1);
  }

  Location loc(const Variable& v) const {
    auto it = store_.find(v);
    if (it == store_.end())
      throw std::invalid_argument("store does not define variable '" + v.name() + "'");
    return it->second;
  }

  static std::size_t popcount(std::uint32_t m) { return static_cast<std::size_t>(__builtin_popcount(m)); }

  std::optional<Location> lookup_mask(const CellVec& cells, std::uint32_t mask, Location addr) const {
    for (std::size_t i = 0; i < cells.size(); ++i)
      if ((mask >> i) & 1u) {
        if (cells[i].first == addr) return cells[i].second;
        if (cells[i].first > addr) break;
      }
    return std::nullopt;
  }

  bool eval_mask(const CellVec& cells, std::uint32_t mask, const Formula& f) {
    switch (f.kind()) {
      case Kind::Emp:
        return mask == 0;
      case Kind::True:
        return true;
      case Kind::False:
        return false;
      case Kind::Eq:
        return loc(f.var()) == loc(f.var2());
      case Kind::PointsTo: {
        auto v = lookup_mask(cells, mask, loc(f.var()));
        return v && *v == loc(f.var2());
      }
      case Kind::Alloc:
        return lookup_mask(cells, mask, loc(f.var())).has_value();
      case Kind::SizeGeq:
        return popcount(mask) >= f.bound();
      case Kind::Not:
        return !eval_mask(cells, mask, f.child());
      case Kind::And:
        return eval_mask(cells, mask, f.left()) && eval_mask(cells, mask, f.right());
      case Kind::Or:
        return eval_mask(cells, mask, f.left()) || eval_mask(cells, mask, f.right());
      case Kind::Implies:
        return !eval_mask(cells, mask, f.left()) || eval_mask(cells, mask, f.right());
      case Kind::Iff:
        return eval_mask(cells, mask, f.left()) == eval_mask(cells, mask, f.right());
      case Kind::Star: {
        // All splits of the active cells into two disjoint halves.
        std::uint32_t sub = mask;
        for (;;) {
          if (eval_mask(cells, sub, f.left()) && eval_mask(cells, mask & ~sub, f.right()))
            return true;
          if (sub == 0) return false;
          sub = (sub - 1) & mask;
        }
      }
      case Kind::Wand:
        return !exists_extension(cells, mask, f.left(), f.right(), /*negate_rhs=*/true);
      case Kind::Septraction:
        return exists_extension(cells, mask, f.left(), f.right(), /*negate_rhs=*/false);
    }
    throw std::logic_error("eval: unreachable");
  }

  // Searches for a heap h' disjoint from the active cells, of size at most
  // wand_extension_budget, with locations drawn from the active addresses,
  // values and store image plus fresh_locations fresh locations (the
  // smallest naturals outside that base set). Returns whether some h'
  // satisfies lhs and the combined heap satisfies rhs (negated for -*).
  bool exists_extension(const CellVec& cells, std::uint32_t mask, const Formula& lhs,
                        const Formula& rhs, bool negate_rhs) {
    CellVec active;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if ((mask >> i) & 1u) active.push_back(cells[i]);

    std::vector<Location> pool;
    for (const Cell& c : active) {
      pool.push_back(c.first);
      pool.push_back(c.second);
    }
    for (const auto& [v, l] : store_) pool.push_back(l);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    {
      Location candidate = 0;
      std::size_t added = 0;
      std::vector<Location> fresh;
      while (added < bounds_.fresh_locations) {
        if (!std::binary_search(pool.begin(), pool.end(), candidate)) {
          fresh.push_back(candidate);
          ++added;
        }
        ++candidate;
      }
      pool.insert(pool.end(), fresh.begin(), fresh.end());
      std::sort(pool.begin(), pool.end());
    }

    std::vector<Location> avail;  // addresses not already allocated
    for (Location l : pool)
      if (!lookup(active, l)) avail.push_back(l);

    CellVec ext;
    return search_extension(active, avail, pool, 0, ext, lhs, rhs, negate_rhs);
  }

  bool search_extension(const CellVec& active, const std::vector<Location>& avail,
                        const std::vector<Location>& pool, std::size_t next_avail, CellVec& ext,
                        const Formula& lhs, const Formula& rhs, bool negate_rhs) {
    if (eval(ext, lhs)) {
      CellVec merged = active;
      merged.insert(merged.end(), ext.begin(), ext.end());
      std::sort(merged.begin(), merged.end());
      bool r = eval(merged, rhs);
      if (negate_rhs ? !r : r) return true;
    }
    if (ext.size() >= bounds_.wand_extension_budget) return false;
    for (std::size_t i = next_avail; i < avail.size(); ++i) {
      for (Location val : pool) {
        ext.emplace_back(avail[i], val);
        bool found = search_extension(active, avail, pool, i + 1, ext, lhs, rhs, negate_rhs);
        ext.pop_back();
        if (found) return true;
      }
    }
    return false;
  }

  const std::map<Variable, Location>& store_;
  const EnumerationBounds& bounds_;
};

}  // namespace detail

// The s |= f relation. Exact for the propositional connectives and *;
// -* and -o quantify over bounded extensions as described on
// EnumerationBounds. Throws if the store misses a free variable of f.
inline bool satisfies(const MemoryState& s, const Formula& f, const EnumerationBounds& b = {}) {
  detail::Evaluator ev(s.store, b);
  return ev.eval(detail::cells_of(s.heap), f);
}

// Streams every (store, heap) with store: vars -> [0, location_universe) and
// |dom(heap)| <= max_heap_size over the same universe, in a fixed order:
// stores as odometers (last variable fastest), heaps by increasing size,
// then domain (lexicographic), then values (odometer).
class StateEnumerator {
 public:
  StateEnumerator(VariableSet vars, EnumerationBounds bounds)
      : vars_(vars.begin(), vars.end()), bounds_(bounds) {
    bounds_.validate(vars_.size());
    store_.assign(vars_.size(), 0);
    heap_size_ = 0;
    domain_.clear();
    values_.clear();
    done_ = false;
  }

  std::optional<MemoryState> next() {
    if (done_) return std::nullopt;
    MemoryState out = current();
    advance();
    return out;
  }

 private:
  MemoryState current() const {
    MemoryState s;
    for (std::size_t i = 0; i < vars_.size(); ++i) s.store[vars_[i]] = store_[i];
    for (std::size_t i = 0; i < domain_.size(); ++i) s.heap[domain_[i]] = values_[i];
    return s;
  }

  // Odometer over heap values, then next domain, then next heap size, then
  // next store.
  void advance() {
    const Location U = bounds_.location_universe;
    for (std::size_t i = values_.size(); i-- > 0;) {
      if (++values_[i] < U) return;
      values_[i] = 0;
    }
    if (next_domain()) return;
    if (heap_size_ < bounds_.max_heap_size && heap_size_ < U) {
      ++heap_size_;
      first_domain();
      return;
    }
    heap_size_ = 0;
    first_domain();
    for (std::size_t i = store_.size(); i-- > 0;) {
      if (++store_[i] < U) return;
      store_[i] = 0;
    }
    done_ = true;
  }

  void first_domain() {
    domain_.resize(heap_size_);
    for (std::size_t i = 0; i < heap_size_; ++i) domain_[i] = static_cast<Location>(i);
    values_.assign(heap_size_, 0);
  }

  // Next size-k subset of [0, U) in lexicographic order.
  bool next_domain() {
    const Location U = bounds_.location_universe;
    std::size_t k = domain_.size();
    for (std::size_t i = k; i-- > 0;) {
      if (domain_[i] + (k - i) < U) {
        ++domain_[i];
        for (std::size_t j = i + 1; j < k; ++j) domain_[j] = domain_[j - 1] + 1;
        values_.assign(k, 0);
        return true;
      }
    }
    return false;
  }

  std::vector<Variable> vars_;
  EnumerationBounds bounds_;
  std::vector<Location> store_;
  std::size_t heap_size_ = 0;
  std::vector<Location> domain_;
  std::vector<Location> values_;
  bool done_ = false;
};

// First enumerated state satisfying f, if any. Complete (an absent result
// means unsatisfiable) when max_heap_size is at least the normalization
// bound of f, location_universe >= |free_vars(f)| + max_heap_size + 1 and
// the wand bounds meet the satisfies contract.
inline std::optional<MemoryState> brute_sat(const Formula& f, const EnumerationBounds& b) {
  StateEnumerator en(free_vars(f), b);
  while (auto s = en.next()) {
    if (satisfies(*s, f, b)) return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Abstract satisfiability for Boolean combinations of core formulae.
//
// An abstraction is a tuple (~, f, D, N): an equivalence relation on X, a
// partial function f on its classes, a set D of classes containing dom(f)
// and a natural N in [0, alpha + |X|] with N >= |D|. Core atoms are read as
//   x = y   iff [x] = [y]          alloc(x)   iff [x] in D
//   x |-> y iff f([x]) = [y]       size >= k  iff N >= k
// Every such abstraction is realized by some memory state, so this decides
// satisfiability for Boolean combinations over Core(X, alpha) without any
// reference to the normalizer.
// ---------------------------------------------------------------------------

namespace detail {

struct Abstraction {
  std::vector<std::size_t> cls;   // variable index -> class index
  std::size_t class_count = 0;
  std::vector<bool> allocated;    // per class
  std::vector<std::size_t> fmap;  // per class; class_count means undefined
  std::size_t size_n = 0;

  bool eval(const Formula& g, const std::vector<Variable>& vars) const {
    auto class_of = [&](const Variable& v) {
      auto it = std::lower_bound(vars.begin(), vars.end(), v);
      return cls[static_cast<std::size_t>(it - vars.begin())];
    };
    switch (g.kind()) {
      case Kind::True:
        return true;
      case Kind::False:
        return false;
      case Kind::Eq:
        return class_of(g.var()) == class_of(g.var2());
      case Kind::Alloc:
        return allocated[class_of(g.var())];
      case Kind::PointsTo:
        return fmap[class_of(g.var())] == class_of(g.var2());
      case Kind::SizeGeq:
        return size_n >= g.bound();
      case Kind::Not:
        return !eval(g.child(), vars);
      case Kind::And:
        return eval(g.left(), vars) && eval(g.right(), vars);
      case Kind::Or:
        return eval(g.left(), vars) || eval(g.right(), vars);
      case Kind::Implies:
        return !eval(g.left(), vars) || eval(g.right(), vars);
      case Kind::Iff:
        return eval(g.left(), vars) == eval(g.right(), vars);
      default:
        throw std::invalid_argument("core_abstract_sat: not a core-literal combination");
    }
  }
};

inline void check_core_combination(const Formula& g, const CoreBasis& basis) {
  switch (g.kind()) {
    case Kind::True:
    case Kind::False:
      return;
    case Kind::Eq:
    case Kind::PointsTo:
      if (!basis.contains(g.var()) || !basis.contains(g.var2()))
        throw std::invalid_argument("core literal outside basis: variable not in X");
      return;
    case Kind::Alloc:
      if (!basis.contains(g.var()))
        throw std::invalid_argument("core literal outside basis: variable not in X");
      return;
    case Kind::SizeGeq:
      if (g.bound() > basis.alpha)
        throw std::invalid_argument("core literal outside basis: size index exceeds alpha");
      return;
    case Kind::Not:
      check_core_combination(g.child(), basis);
      return;
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
    case Kind::Iff:
      check_core_combination(g.left(), basis);
      check_core_combination(g.right(), basis);
      return;
    default:
      throw std::invalid_argument("core_abstract_sat: formula is not a Boolean combination "
                                  "of core literals");
  }
}

// Enumerates set partitions via restricted growth strings.
template <typename Fn>
void for_each_partition(std::size_t n, Fn&& fn) {
  std::vector<std::size_t> rgs(n, 0);
  if (n == 0) {
    fn(rgs, 0);
    return;
  }
  for (;;) {
    std::size_t classes = 0;
    for (std::size_t c : rgs) classes = std::max(classes, c + 1);
    fn(rgs, classes);
    // next RGS
    std::size_t i = n;
    while (i-- > 1) {
      std::size_t maxv = 0;
      for (std::size_t j = 0; j < i; ++j) maxv = std::max(maxv, rgs[j]);
      if (rgs[i] <= maxv) {
        ++rgs[i];
        for (std::size_t j = i + 1; j < n; ++j) rgs[j] = 0;
        break;
      }
      if (i == 1) return;
    }
    if (n == 1) return;
  }
}

}  // namespace detail

// True iff some abstraction satisfies g; g must lie within Core(basis).
inline bool core_abstract_sat(const Formula& g, const CoreBasis& basis) {
  detail::check_core_combination(g, basis);
  const std::size_t n = basis.vars.size();
  bool found = false;
  detail::for_each_partition(n, [&](const std::vector<std::size_t>& rgs, std::size_t classes) {
    if (found) return;
    detail::Abstraction ab;
    ab.cls = rgs;
    ab.class_count = classes;
    const std::size_t undef = classes;
    // Every D subset of classes and every partial f with dom(f) within D.
    for (std::uint32_t dmask = 0; dmask < (1u << classes); ++dmask) {
      ab.allocated.assign(classes, false);
      std::size_t dsize = 0;
      for (std::size_t c = 0; c < classes; ++c)
        if ((dmask >> c) & 1u) {
          ab.allocated[c] = true;
          ++dsize;
        }
      ab.fmap.assign(classes, undef);
      // Odometer over f values for allocated classes: undef or a class.
      std::vector<std::size_t> slots;
      for (std::size_t c = 0; c < classes; ++c)
        if (ab.allocated[c]) slots.push_back(c);
      std::vector<std::size_t> odo(slots.size(), 0);  // 0 = undef, i+1 = class i
      for (;;) {
        for (std::size_t i = 0; i < slots.size(); ++i)
          ab.fmap[slots[i]] = odo[i] == 0 ? undef : odo[i] - 1;
        for (std::size_t N = dsize; N <= basis.alpha + n; ++N) {
          ab.size_n = N;
          if (ab.eval(g, basis.vars)) {
            found = true;
            return;
          }
        }
        std::size_t i = slots.size();
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
  return found;
}

}  // namespace slq
