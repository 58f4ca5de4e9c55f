// Concrete text grammar for formulas, with a recursive-descent parser and a
// minimal-parenthesis printer that round-trips: parse(print(f)) == f.
//
//   formula := iff
//   iff     := imp ("<->" imp)?                     (non-associative)
//   imp     := orx (("->" | "-*" | "-o") imp)?      (right-associative)
//   orx     := andx ("\/" andx)*
//   andx    := unary (("/\" | "*") unary)*
//   unary   := "not" unary | atom
//   atom    := "emp" | "true" | "false" | "alloc" "(" ident ")"
//            | "size" (">=" | "=") nat
//            | ident ("=" | "!=" | "|->") ident | "(" formula ")"
//
// `size = k` is sugar for `size >= k /\ not size >= k+1` and `x != y` for
// `not (x = y)`; neither exists in the tree.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "slq/formula.hpp"

namespace slq {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

namespace detail {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Formula parse() {
    Formula f = parse_iff();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool try_symbol(const std::string& sym) {
    skip_ws();
    if (text_.compare(pos_, sym.size(), sym) != 0) return false;
    // "-" must not split "->" etc.; symbols here are never prefixes of one
    // another except "=" vs "<->"/">=" handled by match order at call sites.
    pos_ += sym.size();
    return true;
  }

  void expect_symbol(const std::string& sym) {
    if (!try_symbol(sym)) fail("expected '" + sym + "'");
  }

  std::optional<std::string> try_ident() {
    skip_ws();
    std::size_t start = pos_;
    if (start >= text_.size() || !std::isalpha(static_cast<unsigned char>(text_[start])))
      return std::nullopt;
    std::size_t end = start + 1;
    while (end < text_.size()) {
      char c = text_[end];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')
        ++end;
      else
        break;
    }
    pos_ = end;
    return text_.substr(start, end - start);
  }

  std::string expect_ident() {
    auto id = try_ident();
    if (!id) fail("expected identifier");
    if (is_keyword(*id)) fail("keyword '" + *id + "' cannot be used as a variable");
    return *id;
  }

  static bool is_keyword(const std::string& s) {
    return s == "emp" || s == "true" || s == "false" || s == "not" || s == "alloc" || s == "size";
  }

  unsigned expect_nat() {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '-') fail("size index must be a natural number");
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      fail("expected natural number");
    unsigned long v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(text_[pos_] - '0');
      if (v > 100000) fail("size index too large");
      ++pos_;
    }
    return static_cast<unsigned>(v);
  }

  Formula parse_iff() {
    Formula lhs = parse_imp();
    if (try_symbol("<->")) {
      Formula rhs = parse_imp();
      skip_ws();
      // Non-associative: a <-> b <-> c needs explicit parentheses.
      if (text_.compare(pos_, 3, "<->") == 0)
        fail("'<->' is non-associative; parenthesize the chain");
      return Formula::iff(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula parse_imp() {
    Formula lhs = parse_or();
    if (try_symbol("->")) return Formula::implies(std::move(lhs), parse_imp());
    if (try_symbol("-*")) return Formula::wand(std::move(lhs), parse_imp());
    if (try_symbol("-o")) return Formula::septraction(std::move(lhs), parse_imp());
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (try_symbol("\\/")) lhs = Formula::disj(std::move(lhs), parse_and());
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_unary();
    for (;;) {
      if (try_symbol("/\\"))
        lhs = Formula::conj(std::move(lhs), parse_unary());
      else if (try_symbol("*"))
        lhs = Formula::star(std::move(lhs), parse_unary());
      else
        return lhs;
    }
  }

  Formula parse_unary() {
    skip_ws();
    std::size_t save = pos_;
    if (auto id = try_ident()) {
      if (*id == "not") return Formula::neg(parse_unary());
      pos_ = save;
    }
    return parse_atom();
  }

  Formula parse_atom() {
    skip_ws();
    if (try_symbol("(")) {
      Formula f = parse_iff();
      expect_symbol(")");
      return f;
    }
    std::size_t save = pos_;
    auto id = try_ident();
    if (!id) fail("expected formula");
    if (*id == "emp") return Formula::emp();
    if (*id == "true") return Formula::truth();
    if (*id == "false") return Formula::falsity();
    if (*id == "not") fail("misplaced 'not'");
    if (*id == "alloc") {
      expect_symbol("(");
      Variable x(expect_ident());
      expect_symbol(")");
      return Formula::alloc(std::move(x));
    }
    if (*id == "size") {
      if (try_symbol(">=")) return Formula::size_geq(expect_nat());
      if (try_symbol("=")) return Formula::size_eq(expect_nat());
      fail("expected '>=' or '=' after 'size'");
    }
    Variable x(*id);
    if (try_symbol("|->")) return Formula::points_to(std::move(x), Variable(expect_ident()));
    if (try_symbol("!=")) return Formula::neg(Formula::eq(std::move(x), Variable(expect_ident())));
    if (try_symbol("=")) return Formula::eq(std::move(x), Variable(expect_ident()));
    pos_ = save;
    fail("expected '=', '!=' or '|->' after variable '" + *id + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse(const std::string& text) { return detail::Parser(text).parse(); }

namespace detail {

// Binding strength used by the printer; higher binds tighter.
enum : int { kLvIff = 0, kLvImp = 1, kLvOr = 2, kLvAnd = 3, kLvNot = 4, kLvAtom = 5 };

// size = k renders as an atom, so detect the sugar pattern first.
inline std::optional<unsigned> match_size_eq(const Formula& f) {
  if (f.kind() != Kind::And) return std::nullopt;
  const Formula& l = f.left();
  const Formula& r = f.right();
  if (l.kind() != Kind::SizeGeq || r.kind() != Kind::Not) return std::nullopt;
  if (r.child().kind() != Kind::SizeGeq) return std::nullopt;
  if (r.child().bound() != l.bound() + 1) return std::nullopt;
  return l.bound();
}

inline void print_rec(const Formula& f, int min_level, std::string& out) {
  auto paren = [&](int level, auto&& body) {
    bool need = level < min_level;
    if (need) out += "(";
    body();
    if (need) out += ")";
  };
  if (auto k = match_size_eq(f)) {
    out += "size = " + std::to_string(*k);
    return;
  }
  switch (f.kind()) {
    case Kind::Emp:
      out += "emp";
      return;
    case Kind::True:
      out += "true";
      return;
    case Kind::False:
      out += "false";
      return;
    case Kind::Eq:
      out += f.var().name() + " = " + f.var2().name();
      return;
    case Kind::PointsTo:
      out += f.var().name() + " |-> " + f.var2().name();
      return;
    case Kind::Alloc:
      out += "alloc(" + f.var().name() + ")";
      return;
    case Kind::SizeGeq:
      out += "size >= " + std::to_string(f.bound());
      return;
    case Kind::Not:
      paren(kLvNot, [&] {
        out += "not ";
        print_rec(f.child(), kLvNot, out);
      });
      return;
    case Kind::And:
    case Kind::Star:
      paren(kLvAnd, [&] {
        print_rec(f.left(), kLvAnd, out);
        out += f.kind() == Kind::And ? " /\\ " : " * ";
        print_rec(f.right(), kLvAnd + 1, out);
      });
      return;
    case Kind::Or:
      paren(kLvOr, [&] {
        print_rec(f.left(), kLvOr, out);
        out += " \\/ ";
        print_rec(f.right(), kLvOr + 1, out);
      });
      return;
    case Kind::Implies:
    case Kind::Wand:
    case Kind::Septraction:
      paren(kLvImp, [&] {
        print_rec(f.left(), kLvImp + 1, out);
        out += f.kind() == Kind::Implies ? " -> " : (f.kind() == Kind::Wand ? " -* " : " -o ");
        print_rec(f.right(), kLvImp, out);
      });
      return;
    case Kind::Iff:
      paren(kLvIff, [&] {
        print_rec(f.left(), kLvIff + 1, out);
        out += " <-> ";
        print_rec(f.right(), kLvIff + 1, out);
      });
      return;
  }
}

}  // namespace detail

inline std::string print(const Formula& f) {
  std::string out;
  detail::print_rec(f, 0, out);
  return out;
}

}  // namespace slq
