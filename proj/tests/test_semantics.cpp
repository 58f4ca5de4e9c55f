#include <catch2/catch_amalgamated.hpp>

#include "slq/parse.hpp"
#include "slq/semantics.hpp"
#include "test_support.hpp"

using namespace slq;
using slq::testing::v;

namespace {

MemoryState state(std::initializer_list<std::pair<const char*, Location>> store,
                  std::initializer_list<std::pair<Location, Location>> heap) {
  MemoryState s;
  for (auto& [name, loc] : store) s.store[Variable(name)] = loc;
  for (auto& [a, b] : heap) s.heap[a] = b;
  return s;
}

std::size_t count_states(VariableSet vars, EnumerationBounds b) {
  StateEnumerator en(std::move(vars), b);
  std::size_t n = 0;
  while (en.next()) ++n;
  return n;
}

}  // namespace

TEST_CASE("satisfies: atomic clauses") {
  CHECK(satisfies(state({{"x", 0}}, {}), Formula::emp()));
  CHECK_FALSE(satisfies(state({{"x", 0}}, {{0, 1}}), Formula::emp()));

  MemoryState s = state({{"x", 0}, {"y", 1}}, {{0, 1}});
  CHECK(satisfies(s, parse("x |-> y /\\ size >= 1 /\\ not size >= 2")));
  CHECK(satisfies(s, parse("alloc(x)")));
  CHECK_FALSE(satisfies(s, parse("alloc(y)")));
  CHECK(satisfies(s, parse("x = x")));
  CHECK_FALSE(satisfies(s, parse("x = y")));
}

TEST_CASE("satisfies: septraction adds a disjoint cell") {
  // From the empty heap one can always carve in a one-cell heap at x.
  MemoryState s = state({{"x", 0}}, {});
  EnumerationBounds b;
  b.wand_extension_budget = 1;
  b.fresh_locations = 2;
  CHECK(satisfies(s, parse("alloc(x) /\\ size = 1 -o true"), b));
  // ... but not one of size two when the budget allows only one cell.
  CHECK_FALSE(satisfies(s, parse("size >= 2 -o true"), b));
}

TEST_CASE("satisfies: star splits exactly") {
  MemoryState s = state({{"x", 0}, {"y", 1}}, {{0, 1}, {1, 0}});
  CHECK(satisfies(s, parse("x |-> y * y |-> x")));
  CHECK(satisfies(s, parse("alloc(x) * alloc(y)")));
  CHECK_FALSE(satisfies(s, parse("alloc(x) * alloc(x)")));
  CHECK(satisfies(s, parse("size = 1 * size = 1")));
  CHECK_FALSE(satisfies(s, parse("emp * size >= 3")));
}

TEST_CASE("satisfies: missing store variable is an error") {
  CHECK_THROWS_AS(satisfies(state({{"x", 0}}, {}), parse("alloc(y)")), std::invalid_argument);
}

TEST_CASE("enumerate_states: counting") {
  EnumerationBounds b;
  b.location_universe = 1;
  b.max_heap_size = 0;
  CHECK(count_states({v("x")}, b) == 1);

  b.location_universe = 2;
  CHECK(count_states({v("x")}, b) == 2);

  b.max_heap_size = 1;
  CHECK(count_states({}, b) == 5);  // empty heap + 4 one-cell heaps
}

TEST_CASE("enumerate_states: deterministic and duplicate-free") {
  EnumerationBounds b;
  b.location_universe = 3;
  b.max_heap_size = 2;
  std::vector<MemoryState> all;
  StateEnumerator en({v("x")}, b);
  while (auto s = en.next()) all.push_back(*s);
  // 3 stores x (1 + 3*3 + 3*9) heaps
  CHECK(all.size() == 3 * (1 + 9 + 27));
  StateEnumerator en2({v("x")}, b);
  std::size_t i = 0;
  while (auto s = en2.next()) CHECK(*s == all[i++]);
  for (std::size_t a = 1; a < all.size(); ++a) CHECK_FALSE(all[a] == all[a - 1]);
}

TEST_CASE("brute_sat: examples") {
  EnumerationBounds b;
  b.location_universe = 4;
  b.max_heap_size = 2;
  CHECK_FALSE(brute_sat(parse("alloc(x) /\\ not alloc(x)"), b).has_value());
  CHECK_FALSE(brute_sat(parse("alloc(x) * alloc(x)"), b).has_value());

  auto w = brute_sat(parse("x |-> y"), b);
  REQUIRE(w.has_value());
  CHECK(satisfies(*w, parse("x |-> y"), b));
  // The enumeration order fixes the witness: first store is x->0, y->0 and
  // the first matching heap is then {0 -> 0}.
  CHECK(*w == state({{"x", 0}, {"y", 0}}, {{0, 0}}));
}

TEST_CASE("frame agnosticism: pure atoms ignore the heap") {
  EnumerationBounds b;
  b.location_universe = 4;
  b.max_heap_size = 2;
  Formula eq = parse("x = y");
  StateEnumerator en({v("x"), v("y")}, b);
  while (auto s = en.next()) {
    bool full = satisfies(*s, eq, b);
    MemoryState t = *s;
    t.heap.clear();
    CHECK(satisfies(t, eq, b) == full);
    for (auto& [a, vl] : s->heap) {
      MemoryState u = *s;
      u.heap.erase(a);
      CHECK(satisfies(u, eq, b) == full);
    }
  }
}

namespace {

// Independent split enumerator: all (h1, h2) with h1 + h2 = heap, computed
// over index subsets of the cell list rather than satisfies' bitmask walk.
std::vector<std::pair<MemoryState, MemoryState>> all_splits(const MemoryState& s) {
  std::vector<std::pair<Location, Location>> cells(s.heap.begin(), s.heap.end());
  std::vector<std::pair<MemoryState, MemoryState>> out;
  std::size_t n = cells.size();
  for (std::size_t pick = 0; pick < (std::size_t{1} << n); ++pick) {
    MemoryState a{s.store, {}}, b{s.store, {}};
    for (std::size_t i = 0; i < n; ++i)
      (pick >> i & 1 ? a : b).heap.insert(cells[i]);
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

}  // namespace

TEST_CASE("star soundness against an independent split enumerator") {
  std::mt19937 rng(12);
  EnumerationBounds b;
  b.location_universe = 4;
  b.max_heap_size = 2;
  b.wand_extension_budget = 2;
  b.fresh_locations = 3;
  slq::testing::GenOptions opts;
  opts.vars = {v("x"), v("y")};
  opts.max_connectives = 3;
  opts.separating = false;  // the split-checked connective sits on top
  for (int round = 0; round < 15; ++round) {
    Formula lhs = slq::testing::random_formula(rng, opts);
    Formula rhs = slq::testing::random_formula(rng, opts);
    Formula star = Formula::star(lhs, rhs);
    StateEnumerator en({v("x"), v("y")}, b);
    while (auto s = en.next()) {
      bool via_satisfies = satisfies(*s, star, b);
      bool via_splits = false;
      for (auto& [h1, h2] : all_splits(*s))
        if (satisfies(h1, lhs, b) && satisfies(h2, rhs, b)) {
          via_splits = true;
          break;
        }
      REQUIRE(via_satisfies == via_splits);
    }
  }
}

TEST_CASE("monotone size") {
  EnumerationBounds b;
  b.location_universe = 5;
  b.max_heap_size = 3;
  StateEnumerator en({}, b);
  while (auto s = en.next()) {
    for (unsigned k = 0; k < 4; ++k) {
      if (satisfies(*s, Formula::size_geq(k + 1), b))
        CHECK(satisfies(*s, Formula::size_geq(k), b));
    }
  }
}

TEST_CASE("core_abstract_sat: examples") {
  CoreBasis basis2({v("x"), v("y")}, 2);
  CHECK_FALSE(core_abstract_sat(parse("alloc(x) /\\ alloc(y) /\\ x != y /\\ not size >= 2"),
                                basis2));
  CHECK(core_abstract_sat(parse("size >= 0"), basis2));

  CoreBasis basis3({v("x"), v("y"), v("z")}, 1);
  CHECK_FALSE(core_abstract_sat(parse("x |-> y /\\ x |-> z /\\ y != z"), basis3));
}

TEST_CASE("core_abstract_sat: rejects literals outside the basis") {
  CoreBasis basis({v("x")}, 2);
  CHECK_THROWS_AS(core_abstract_sat(parse("alloc(y)"), basis), std::invalid_argument);
  CHECK_THROWS_AS(core_abstract_sat(parse("size >= 3"), basis), std::invalid_argument);
  CHECK_THROWS_AS(core_abstract_sat(parse("emp"), basis), std::invalid_argument);
}

namespace {

bool contains_emp(const Formula& f) {
  switch (f.kind()) {
    case Kind::Emp:
      return true;
    case Kind::Not:
      return contains_emp(f.child());
    default:
      if (is_binary(f.kind())) return contains_emp(f.left()) || contains_emp(f.right());
      return false;
  }
}

}  // namespace

TEST_CASE("core_abstract_sat agrees with brute_sat on random core combinations") {
  std::mt19937 rng(31337);
  slq::testing::GenOptions opts;
  opts.vars = {v("x"), v("y")};
  opts.max_connectives = 5;
  opts.max_size_index = 2;
  opts.separating = false;
  CoreBasis basis({v("x"), v("y")}, 2);
  EnumerationBounds b;
  b.max_heap_size = 2;  // max(alpha, |X|)
  b.location_universe = 5;
  int used = 0;
  for (int i = 0; used < 100 && i < 1000; ++i) {
    Formula f = slq::testing::random_formula(rng, opts);
    if (contains_emp(f)) continue;  // emp is not a core formula
    ++used;
    INFO(print(f));
    CHECK(core_abstract_sat(f, basis) == brute_sat(f, b).has_value());
  }
  CHECK(used == 100);
}

TEST_CASE("memory state text form") {
  CHECK(to_text(state({{"x", 0}, {"y", 1}}, {{0, 1}, {3, 3}})) ==
        "store: x->0, y->1 ; heap: 0->1, 3->3");
  CHECK(to_text(state({}, {})) == "store: (empty) ; heap: (empty)");
}
