#include <catch2/catch_amalgamated.hpp>

#include "slq/core.hpp"
#include "slq/parse.hpp"
#include "test_support.hpp"

using namespace slq;
using slq::testing::v;

namespace {

// Equivalence of two Boolean combinations of core literals, decided by the
// independent abstraction oracle from the semantics module.
bool equivalent_core(const NormalizedForm& got, const Formula& expect) {
  VariableSet xs(got.basis.vars.begin(), got.basis.vars.end());
  CoreBasis eb = compute_basis(expect);
  xs.insert(eb.vars.begin(), eb.vars.end());
  CoreBasis common(xs, std::max(got.basis.alpha, eb.alpha));
  return !core_abstract_sat(Formula::neg(Formula::iff(got.body, expect)), common);
}

// A concrete type over ({x}, alpha) with the polarities given explicitly.
CoreType unit_type(unsigned alpha, bool alloc, bool pto, unsigned size_threshold) {
  CoreType t(CoreBasis({v("x")}, alpha));
  t.set_eq(0, 0, true);
  t.set_alloc(0, alloc);
  t.set_pto(0, 0, pto);
  for (unsigned k = 0; k <= alpha; ++k) t.set_size_geq(k, k <= size_threshold);
  return t;
}

}  // namespace

TEST_CASE("compute_basis") {
  CHECK(compute_basis(Formula::emp()) == CoreBasis({}, 1));
  CHECK(compute_basis(parse("size >= 2 * size >= 3")) == CoreBasis({}, 5));
  CHECK(compute_basis(parse("alloc(x) -* alloc(y)")) == CoreBasis({v("x"), v("y")}, 2));
  CHECK(compute_basis(parse("size >= 0")) == CoreBasis({}, 1));
}

TEST_CASE("core_type_sat: examples") {
  // x=x+, alloc x+, x|->x+, size>=0+, size>=1+ over ({x},1) is satisfiable
  CHECK(core_type_sat(unit_type(1, true, true, 1)));
  // alloc x+, alloc y+, x != y, but not size >= 2: unsatisfiable
  {
    CoreType t(CoreBasis({v("x"), v("y")}, 2));
    t.set_eq(0, 0, true);
    t.set_eq(1, 1, true);
    t.set_alloc(0, true);
    t.set_alloc(1, true);
    t.set_size_geq(0, true);
    t.set_size_geq(1, true);
    CHECK_FALSE(core_type_sat(t));
    t.set_size_geq(2, true);
    CHECK(core_type_sat(t));
  }
  // x=x negative: unsatisfiable
  {
    CoreType t = unit_type(1, false, false, 0);
    t.set_eq(0, 0, false);
    CHECK_FALSE(core_type_sat(t));
  }
  // x|->x positive without alloc x: unsatisfiable
  CHECK_FALSE(core_type_sat(unit_type(1, false, true, 1)));
  // negative size >= 0: unsatisfiable
  {
    CoreType t = unit_type(1, false, false, 0);
    t.set_size_geq(0, false);
    CHECK_FALSE(core_type_sat(t));
  }
}

TEST_CASE("core_type_model: canonical witnesses") {
  // self loop at l1 when x |-> x is positive
  {
    CoreType t = unit_type(1, true, true, 1);
    MemoryState m = core_type_model(t);
    CHECK(m.store.at(v("x")) == 1);
    CHECK(m.heap == std::map<Location, Location>{{1, 1}});
    CHECK(satisfies(m, t.to_formula()));
  }
  // fully negative type: empty heap, x parked on a fresh location
  {
    CoreType t = unit_type(1, false, false, 0);
    MemoryState m = core_type_model(t);
    CHECK(m.heap.empty());
    CHECK(m.store.at(v("x")) == 1);
    CHECK(satisfies(m, t.to_formula()));
  }
  // size >= 2 with no allocations: two garbage cells pointing at l0
  {
    CoreType t = unit_type(2, false, false, 2);
    MemoryState m = core_type_model(t);
    CHECK(m.heap == std::map<Location, Location>{{1, 0}, {2, 0}});
    CHECK(satisfies(m, t.to_formula()));
  }
  CHECK_THROWS_AS(core_type_model(unit_type(1, false, true, 1)), std::invalid_argument);
}

TEST_CASE("every enumerated core type is satisfiable and models check out") {
  CoreBasis basis({v("x"), v("y")}, 2);
  std::vector<CoreType> types = enumerate_core_types(basis);
  CHECK(types.size() == 31);
  for (const CoreType& t : types) {
    CHECK(core_type_sat(t));
    MemoryState m = core_type_model(t);
    CHECK(satisfies(m, t.to_formula()));
  }
}

TEST_CASE("to_core_type_dnf") {
  CoreBasis basis({v("x")}, 1);
  // a tautology keeps every satisfiable type
  CHECK(to_core_type_dnf({basis, Formula::truth()}).size() ==
        enumerate_core_types(basis).size());
  // a contradiction keeps none
  CHECK(to_core_type_dnf({basis, parse("alloc(x) /\\ not alloc(x)")}).empty());
  // emp rendered as not size >= 1 keeps exactly the empty-heap type
  std::vector<CoreType> ts = to_core_type_dnf({basis, parse("not size >= 1")});
  CHECK(ts.size() == 1);
  for (const CoreType& t : ts) {
    CHECK_FALSE(t.size_geq(1));
    CHECK_FALSE(t.alloc(0));
    CHECK_FALSE(t.pto(0, 0));
  }
}

TEST_CASE("boxstar: spec examples") {
  CoreType full = unit_type(1, true, true, 1);  // x=x, alloc x, x|->x, size>=1
  CoreType empty = unit_type(1, false, false, 0);

  LiteralConjunction c = boxstar(full, empty);
  CHECK(c == LiteralConjunction{{CoreAtom::eq(v("x"), v("x")), true},
                                {CoreAtom::alloc(v("x")), true},
                                {CoreAtom::points_to(v("x"), v("x")), true},
                                {CoreAtom::size_geq(0), true},
                                {CoreAtom::size_geq(1), true}});

  // alloc x on both sides contradicts
  CHECK(has_flat_contradiction(boxstar(full, full)));

  // emp * emp keeps the heap empty: the size family yields not size >= 1
  LiteralConjunction ee = boxstar(empty, empty);
  CHECK(std::count(ee.begin(), ee.end(), CoreLiteral{CoreAtom::size_geq(1), false}) == 1);
  CHECK_FALSE(has_flat_contradiction(ee));
}

TEST_CASE("boxseptra: spec examples") {
  CoreType full = unit_type(1, true, true, 1);
  CoreType empty = unit_type(1, false, false, 0);

  // emp -o psi is psi
  CHECK(boxseptra(empty, full) ==
        LiteralConjunction{{CoreAtom::eq(v("x"), v("x")), true},
                           {CoreAtom::alloc(v("x")), true},
                           {CoreAtom::points_to(v("x"), v("x")), true},
                           {CoreAtom::size_geq(0), true},
                           {CoreAtom::size_geq(1), true}});

  // x |-> y in t1 against not x |-> y in t2 contradicts
  {
    CoreBasis b2({v("x"), v("y")}, 2);
    CoreType t1(b2), t2(b2);
    for (CoreType* t : {&t1, &t2}) {
      t->set_eq(0, 0, true);
      t->set_eq(1, 1, true);
      t->set_size_geq(0, true);
    }
    t1.set_alloc(0, true);
    t1.set_pto(0, 1, true);
    t1.set_size_geq(1, true);
    CHECK(has_flat_contradiction(boxseptra(t1, t2)));
  }

  // alloc x in t1 with not alloc x in t2 contradicts (the figure's last row)
  CHECK(has_flat_contradiction(boxseptra(unit_type(1, true, false, 1),
                                         unit_type(1, false, false, 1))));
}

TEST_CASE("eliminate_star: spec examples") {
  NormalizedForm emp_nf = normalize(Formula::emp());
  CHECK(equivalent_core(eliminate_star(emp_nf, emp_nf), Formula::neg(Formula::size_geq(1))));

  NormalizedForm ax = normalize(parse("alloc(x)"));
  CHECK(equivalent_core(eliminate_star(ax, ax), Formula::falsity()));

  NormalizedForm s2 = normalize(parse("size >= 2"));
  NormalizedForm s3 = normalize(parse("size >= 3"));
  CHECK(equivalent_core(eliminate_star(s2, s3), Formula::size_geq(5)));
}

TEST_CASE("eliminate_septraction: spec examples") {
  NormalizedForm ff = normalize(Formula::falsity());
  NormalizedForm tt = normalize(Formula::truth());
  CHECK(equivalent_core(eliminate_septraction(ff, tt), Formula::falsity()));

  // emp -o g is g
  NormalizedForm emp_nf = normalize(Formula::emp());
  NormalizedForm g = normalize(parse("alloc(x) /\\ size = 1"));
  CHECK(equivalent_core(eliminate_septraction(emp_nf, g), parse("alloc(x) /\\ size = 1")));

  // a one-cell heap avoiding x can always be carved in
  NormalizedForm lhs = normalize(parse("size = 1 /\\ not alloc(x)"));
  CHECK(equivalent_core(eliminate_septraction(lhs, tt), Formula::truth()));
}

TEST_CASE("normalize: atoms and the figure formulas") {
  CHECK(normalize(Formula::emp()).body == Formula::neg(Formula::size_geq(1)));

  // x |-> y * true is equivalent to x |-> y
  CHECK(equivalent_core(normalize(parse("x |-> y * true")), parse("x |-> y")));

  CHECK(decide_valid(parse("emp -> (alloc(x) /\\ size = 1 -* not size >= 2)")).valid);
}

TEST_CASE("normalizer soundness on random formulas") {
  std::mt19937 rng(424242);
  slq::testing::GenOptions opts;
  opts.vars = {v("x"), v("y")};
  opts.max_connectives = 4;
  opts.max_size_index = 2;
  int used = 0;
  for (int i = 0; used < 40 && i < 500; ++i) {
    Formula f = slq::testing::random_formula(rng, opts);
    CoreBasis basis = compute_basis(f);
    if (basis.alpha > 4) continue;  // keep state grids small in the unit suite
    ++used;
    NormalizedForm n = normalize(f);
    EnumerationBounds b = exact_bounds(basis);
    StateEnumerator en(VariableSet(basis.vars.begin(), basis.vars.end()), b);
    while (auto s = en.next()) {
      INFO(print(f));
      INFO(to_text(*s));
      REQUIRE(satisfies(*s, f, b) == satisfies(*s, n.body, b));
    }
  }
  CHECK(used == 40);
}

TEST_CASE("decide_sat: examples") {
  CHECK_FALSE(decide_sat(parse("alloc(x) * alloc(x)")).sat);

  SatResult r = decide_sat(parse("x |-> y /\\ size = 1"));
  REQUIRE(r.sat);
  CHECK(r.witness->heap.size() == 1);

  SatResult t = decide_sat(Formula::truth());
  REQUIRE(t.sat);
  CHECK(t.witness->heap.empty());
}

TEST_CASE("decide_valid: examples and negative controls") {
  CHECK(decide_valid(parse("emp -> (alloc(x) /\\ size = 1 -* not size >= 2)")).valid);
  CHECK(decide_valid(parse("emp -> (alloc(x) /\\ size = 1 -* size = 1)")).valid);

  ValidityResult r = decide_valid(parse("x |-> y -> alloc(y)"));
  REQUIRE_FALSE(r.valid);
  REQUIRE(r.countermodel.has_value());
  CHECK(satisfies(*r.countermodel, parse("x |-> y /\\ not alloc(y)"),
                  exact_bounds(compute_basis(parse("x |-> y -> alloc(y)")))));
}

TEST_CASE("entails: examples") {
  CHECK(entails(parse("x |-> y /\\ x |-> z"), parse("y = z")).valid);
  CHECK(entails(parse("not size >= 2 * not size >= 3"), parse("not size >= 4")).valid);
  ValidityResult r = entails(parse("size >= 1"), parse("alloc(x)"));
  CHECK_FALSE(r.valid);
  REQUIRE(r.countermodel.has_value());
}

TEST_CASE("oracle agreement: decide_sat vs brute_sat on a small suite") {
  std::mt19937 rng(777);
  slq::testing::GenOptions opts;
  opts.vars = {v("x"), v("y")};
  opts.max_connectives = 4;
  opts.max_size_index = 2;
  int used = 0;
  for (int i = 0; used < 30 && i < 500; ++i) {
    Formula f = slq::testing::random_formula(rng, opts);
    CoreBasis basis = compute_basis(f);
    if (basis.alpha > 3) continue;
    ++used;
    INFO(print(f));
    CHECK(decide_sat(f).sat == brute_sat(f, exact_bounds(basis)).has_value());
  }
  CHECK(used == 30);
}

TEST_CASE("adjunction coherence") {
  std::mt19937 rng(5150);
  slq::testing::GenOptions opts;
  opts.vars = {v("x")};
  opts.max_connectives = 2;
  opts.max_size_index = 1;
  for (int i = 0; i < 25; ++i) {
    Formula f = slq::testing::random_formula(rng, opts);
    Formula g = slq::testing::random_formula(rng, opts);
    Formula h = slq::testing::random_formula(rng, opts);
    bool lhs = decide_valid(Formula::implies(Formula::star(f, g), h)).valid;
    bool rhs = decide_valid(Formula::implies(f, Formula::wand(g, h))).valid;
    INFO(print(f));
    INFO(print(g));
    INFO(print(h));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("normalize trace reports elimination sizes") {
  NormalizeTrace trace;
  decide_sat(parse("alloc(x) * alloc(x)"), &trace);
  REQUIRE_FALSE(trace.steps.empty());
  CHECK(trace.steps[0].op == '*');
  CHECK(trace.steps[0].left_types > 0);
  CHECK(trace.steps[0].cubes == 0);  // every cube collapses to false
}
