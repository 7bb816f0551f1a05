/*
 * Copyright 2026 The cspforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cspforge/syntax/parser.hpp"

#include <algorithm>
#include <unordered_set>

namespace cspforge::syntax {

namespace {

const std::unordered_set<std::string> kKeywords = {
    "Stop", "Skip", "if", "else", "var", "enum", "true", "false"};

bool is_keyword(const std::string& s) { return kKeywords.count(s) > 0; }

class Parser {
 public:
  explicit Parser(std::string_view source) : toks_(tokenize(source)) {}

  ModelAst parse_model() {
    ModelAst ast;
    while (!at(Tok::End)) parse_top_level(ast);
    return ast;
  }

  AssertionSnippet parse_snippet() {
    AssertionSnippet out;
    ModelAst scratch;
    while (at(Tok::Directive) && cur().text == "#define") {
      parse_define(scratch);
    }
    if (!(at(Tok::Directive) && cur().text == "#assert")) fail({"#assert", "#define"});
    out.assertion = parse_assert();
    expect(Tok::End);
    out.constants = std::move(scratch.constants);
    out.defines = std::move(scratch.defines);
    return out;
  }

  ExprPtr parse_standalone_expr() {
    auto e = parse_expr();
    expect(Tok::End);
    return e;
  }

  LtlPtr parse_standalone_ltl() {
    auto f = parse_ltl();
    expect(Tok::End);
    return f;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t k) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok t) const { return cur().kind == t; }
  bool at_ident(std::string_view word) const {
    return cur().kind == Tok::Ident && cur().text == word;
  }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(std::set<std::string> expected, std::string detail = {}) const {
    throw SyntaxError(cur().loc, std::move(expected), cur().text, std::move(detail));
  }

  Token expect(Tok t) {
    if (!at(t)) fail({std::string(token_name(t))});
    return take();
  }

  Token expect_ident(std::string_view what) {
    if (!at(Tok::Ident) || is_keyword(cur().text)) fail({std::string(what)});
    return take();
  }

  void expect_word(std::string_view word) {
    if (!at_ident(word)) fail({"'" + std::string(word) + "'"});
    take();
  }

  // -------------------------------------------------------------------------
  // Declarations

  void parse_top_level(ModelAst& ast) {
    if (at(Tok::Directive)) {
      if (cur().text == "#define") {
        parse_define(ast);
      } else {
        ast.asserts.push_back(parse_assert());
      }
      return;
    }
    if (at_ident("var")) {
      parse_var(ast);
      return;
    }
    if (at_ident("enum")) {
      parse_enum(ast);
      return;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text) && ahead(1).kind == Tok::LParen) {
      parse_process_def(ast);
      return;
    }
    fail({"#define", "#assert", "'var'", "'enum'", "process definition"});
  }

  static bool literal_value(const Expr& e, std::int64_t& out) {
    if (const auto* lit = std::get_if<IntLit>(&e.node)) {
      out = lit->value;
      return true;
    }
    if (const auto* u = std::get_if<Unary>(&e.node)) {
      if (u->op == UnaryOp::Negate) {
        if (const auto* lit = std::get_if<IntLit>(&u->operand->node)) {
          out = -lit->value;
          return true;
        }
      }
    }
    return false;
  }

  void parse_define(ModelAst& ast) {
    SourceLoc loc = take().loc;
    auto name = expect_ident("definition name");
    auto expr = parse_expr();
    expect(Tok::Semi);
    std::int64_t value = 0;
    if (literal_value(*expr, value)) {
      ast.constants.push_back(ConstDecl{name.text, value, loc});
    } else {
      ast.defines.push_back(DefineDecl{name.text, expr, loc});
    }
  }

  void parse_enum(ModelAst& ast) {
    take();
    expect(Tok::LBrace);
    std::int64_t next = 0;
    do {
      auto name = expect_ident("enumerator name");
      ast.constants.push_back(ConstDecl{name.text, next++, name.loc});
    } while (at(Tok::Comma) && (take(), true));
    expect(Tok::RBrace);
    expect(Tok::Semi);
  }

  std::int64_t parse_array_size(const ModelAst& ast) {
    if (at(Tok::Int)) return std::stoll(take().text);
    if (at(Tok::Ident)) {
      auto tok = take();
      if (const auto* c = ast.find_constant(tok.text)) return c->value;
      throw NameError(tok.loc, "array size '" + tok.text + "' is not a declared constant");
    }
    fail({"integer", "constant name"});
  }

  void parse_var(ModelAst& ast) {
    SourceLoc loc = take().loc;
    VarDecl decl;
    decl.loc = loc;
    decl.name = expect_ident("variable name").text;
    if (at(Tok::LBracket)) {
      take();
      auto size_loc = cur().loc;
      std::int64_t size = parse_array_size(ast);
      if (size <= 0) throw SyntaxError(size_loc, {"positive array size"}, std::to_string(size));
      decl.array_size = size;
      expect(Tok::RBracket);
    }
    if (at(Tok::Colon)) {
      take();
      expect(Tok::LBrace);
      auto low = parse_expr();
      expect(Tok::DotDot);
      auto high = parse_expr();
      expect(Tok::RBrace);
      decl.range = VarRange{low, high};
    }
    if (at(Tok::Assign)) {
      take();
      if (at(Tok::LBracket)) {
        auto open = take();
        do {
          decl.init.push_back(parse_expr());
        } while (at(Tok::Comma) && (take(), true));
        expect(Tok::RBracket);
        if (!decl.array_size) {
          decl.array_size = static_cast<std::int64_t>(decl.init.size());
        } else if (static_cast<std::int64_t>(decl.init.size()) != *decl.array_size) {
          throw SyntaxError(open.loc, {std::to_string(*decl.array_size) + " initial values"},
                            std::to_string(decl.init.size()) + " values",
                            "array initializer length does not match declared size");
        }
      } else {
        if (decl.array_size) fail({"'['"}, "array variables need a bracketed initializer");
        decl.init.push_back(parse_expr());
      }
    }
    expect(Tok::Semi);
    ast.variables.push_back(std::move(decl));
  }

  void parse_process_def(ModelAst& ast) {
    auto name = take();
    expect(Tok::LParen);
    if (!at(Tok::RParen)) {
      fail({"')'"}, "process parameters are not supported; define '" + name.text +
                        "()' without parameters");
    }
    take();
    expect(Tok::Assign);
    auto body = parse_seq(true);
    expect(Tok::Semi);
    ast.processes.push_back(ProcessDef{name.text, body, name.loc});
  }

  AssertDecl parse_assert() {
    SourceLoc loc = take().loc;
    AssertDecl decl;
    decl.loc = loc;
    decl.process = expect_ident("process name").text;
    if (at(Tok::LParen)) {
      take();
      if (!at(Tok::RParen)) fail({"')'"}, "process parameters are not supported");
      take();
    }
    if (at_ident("deadlockfree")) {
      take();
      decl.kind = DeadlockFree{};
    } else if (at_ident("reaches")) {
      take();
      decl.kind = Reaches{expect_ident("predicate name").text};
    } else if (at(Tok::Models)) {
      take();
      decl.kind = Ltl{parse_ltl()};
    } else {
      fail({"'deadlockfree'", "'reaches'", "'|='"});
    }
    expect(Tok::Semi);
    return decl;
  }

  // -------------------------------------------------------------------------
  // Processes

  // Index of the token after the parenthesis group starting at `k`.
  std::size_t skip_parens(std::size_t k) const {
    int depth = 0;
    for (; k < toks_.size(); ++k) {
      if (toks_[k].kind == Tok::LParen) ++depth;
      if (toks_[k].kind == Tok::RParen && --depth == 0) return k + 1;
      if (toks_[k].kind == Tok::End) return k;
    }
    return k;
  }

  // Whether a `;` at `pos_` continues a top-level body as sequential
  // composition rather than terminating the definition.
  bool semicolon_continues_body() const {
    const Token& next = ahead(1);
    switch (next.kind) {
      case Tok::LParen:
      case Tok::LBracket:
        return true;
      case Tok::Ident: {
        if (next.text == "var" || next.text == "enum" || next.text == "else") return false;
        if (is_keyword(next.text)) return true;
        if (ahead(2).kind != Tok::LParen) return true;
        std::size_t after = skip_parens(pos_ + 2);
        return !(after < toks_.size() && toks_[after].kind == Tok::Assign);
      }
      default:
        return false;
    }
  }

  ProcPtr parse_seq(bool top_level) {
    auto left = parse_par();
    while (at(Tok::Semi)) {
      if (top_level && !semicolon_continues_body()) break;
      auto loc = take().loc;
      auto right = parse_par();
      left = make_seq(left, right, loc);
    }
    return left;
  }

  ProcPtr parse_par() {
    auto left = parse_choice();
    for (;;) {
      if (at(Tok::Interleave)) {
        auto loc = take().loc;
        left = make_interleave(left, parse_choice(), loc);
      } else if (at(Tok::OrOr)) {
        auto loc = take().loc;
        if (!at(Tok::LBrace)) fail({"'{'"}, "'||' needs an explicit alphabet, e.g. '||{a, b}'");
        take();
        std::vector<std::string> alphabet;
        if (!at(Tok::RBrace)) {
          do {
            alphabet.push_back(expect_ident("event name").text);
          } while (at(Tok::Comma) && (take(), true));
        }
        expect(Tok::RBrace);
        left = make_parallel(left, parse_choice(), std::move(alphabet), loc);
      } else {
        return left;
      }
    }
  }

  ProcPtr parse_choice() {
    auto left = parse_prefix();
    while (at(Tok::Box)) {
      auto loc = take().loc;
      left = make_choice(left, parse_prefix(), loc);
    }
    return left;
  }

  ProcPtr parse_prefix() {
    SourceLoc loc = cur().loc;
    ExprPtr guard;
    if (at(Tok::LBracket)) {
      take();
      guard = parse_expr();
      expect(Tok::RBracket);
      if (!at(Tok::Ident) || is_keyword(cur().text)) fail({"event name"});
    }
    if (at(Tok::Ident) && !is_keyword(cur().text) &&
        (ahead(1).kind == Tok::Arrow || ahead(1).kind == Tok::LBrace || guard)) {
      auto event = take();
      std::vector<Assignment> program;
      if (at(Tok::LBrace)) program = parse_program();
      expect(Tok::Arrow);
      auto cont = parse_prefix();
      return make_prefix(guard, event.text, std::move(program), cont, loc);
    }
    return parse_atom();
  }

  std::vector<Assignment> parse_program() {
    expect(Tok::LBrace);
    std::vector<Assignment> out;
    while (!at(Tok::RBrace)) {
      Assignment a;
      auto target = expect_ident("variable name");
      a.target = target.text;
      a.loc = target.loc;
      if (at(Tok::LBracket)) {
        take();
        a.index = parse_expr();
        expect(Tok::RBracket);
      }
      expect(Tok::Assign);
      a.value = parse_expr();
      out.push_back(std::move(a));
      if (at(Tok::Semi)) {
        take();
      } else if (!at(Tok::RBrace)) {
        fail({"';'", "'}'"});
      }
    }
    take();
    return out;
  }

  ProcPtr parse_block() {
    expect(Tok::LBrace);
    auto body = parse_seq(false);
    expect(Tok::RBrace);
    return body;
  }

  ProcPtr parse_atom() {
    SourceLoc loc = cur().loc;
    if (at_ident("Stop")) {
      take();
      return make_stop(loc);
    }
    if (at_ident("Skip")) {
      take();
      return make_skip(loc);
    }
    if (at_ident("if")) return parse_if();
    if (at(Tok::LParen)) {
      take();
      auto inner = parse_seq(false);
      expect(Tok::RParen);
      return inner;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      auto name = take();
      if (!at(Tok::LParen)) fail({"'('", "'->'", "'{'"});
      take();
      if (!at(Tok::RParen)) {
        fail({"')'"}, "process parameters are not supported; call '" + name.text + "()'");
      }
      take();
      return make_call(name.text, loc);
    }
    fail({"process expression"});
  }

  ProcPtr parse_if() {
    SourceLoc loc = take().loc;
    expect(Tok::LParen);
    auto cond = parse_expr();
    expect(Tok::RParen);
    auto then_branch = parse_block();
    ProcPtr else_branch;
    if (at_ident("else")) {
      take();
      else_branch = at_ident("if") ? parse_if() : parse_block();
    } else {
      else_branch = make_skip(loc);
    }
    return make_if(cond, then_branch, else_branch, loc);
  }

  // -------------------------------------------------------------------------
  // Expressions (precedence climbing)

  static int binary_prec(Tok t) {
    switch (t) {
      case Tok::OrOr: return 1;
      case Tok::AndAnd: return 2;
      case Tok::Eq:
      case Tok::Ne: return 3;
      case Tok::Lt:
      case Tok::Le:
      case Tok::Gt:
      case Tok::Ge: return 4;
      case Tok::Plus:
      case Tok::Minus: return 5;
      case Tok::Star:
      case Tok::Slash:
      case Tok::Percent: return 6;
      default: return 0;
    }
  }

  static BinaryOp binary_op(Tok t) {
    switch (t) {
      case Tok::OrOr: return BinaryOp::Or;
      case Tok::AndAnd: return BinaryOp::And;
      case Tok::Eq: return BinaryOp::Eq;
      case Tok::Ne: return BinaryOp::Ne;
      case Tok::Lt: return BinaryOp::Lt;
      case Tok::Le: return BinaryOp::Le;
      case Tok::Gt: return BinaryOp::Gt;
      case Tok::Ge: return BinaryOp::Ge;
      case Tok::Plus: return BinaryOp::Add;
      case Tok::Minus: return BinaryOp::Sub;
      case Tok::Star: return BinaryOp::Mul;
      case Tok::Slash: return BinaryOp::Div;
      default: return BinaryOp::Mod;
    }
  }

  ExprPtr parse_expr(int min_prec = 1) {
    auto lhs = parse_unary();
    for (;;) {
      int prec = binary_prec(cur().kind);
      if (prec < min_prec || prec == 0) return lhs;
      auto op = take();
      auto rhs = parse_expr(prec + 1);
      lhs = make_binary(binary_op(op.kind), lhs, rhs, op.loc);
    }
  }

  ExprPtr parse_unary() {
    SourceLoc loc = cur().loc;
    if (at(Tok::Bang)) {
      take();
      return make_unary(UnaryOp::Not, parse_unary(), loc);
    }
    if (at(Tok::Minus)) {
      take();
      return make_unary(UnaryOp::Negate, parse_unary(), loc);
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    SourceLoc loc = cur().loc;
    if (at(Tok::Int)) return make_int(std::stoll(take().text), loc);
    if (at_ident("true")) {
      take();
      return make_bool(true, loc);
    }
    if (at_ident("false")) {
      take();
      return make_bool(false, loc);
    }
    if (at(Tok::LParen)) {
      take();
      auto e = parse_expr();
      expect(Tok::RParen);
      return e;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text)) {
      auto name = take();
      if (at(Tok::LBracket)) {
        take();
        auto index = parse_expr();
        expect(Tok::RBracket);
        return make_index(name.text, index, loc);
      }
      return make_name(name.text, loc);
    }
    fail({"expression"});
  }

  // -------------------------------------------------------------------------
  // LTL

  bool at_ltl_op(std::string_view word) const {
    return at(Tok::Ident) && cur().text == word;
  }

  LtlPtr parse_ltl() {
    auto lhs = parse_ltl_or();
    if (at(Tok::Arrow)) {
      auto loc = take().loc;
      return make_ltl_binary(LtlBinaryOp::Implies, lhs, parse_ltl(), loc);
    }
    return lhs;
  }

  LtlPtr parse_ltl_or() {
    auto lhs = parse_ltl_and();
    while (at(Tok::OrOr)) {
      auto loc = take().loc;
      lhs = make_ltl_binary(LtlBinaryOp::Or, lhs, parse_ltl_and(), loc);
    }
    return lhs;
  }

  LtlPtr parse_ltl_and() {
    auto lhs = parse_ltl_until();
    while (at(Tok::AndAnd)) {
      auto loc = take().loc;
      lhs = make_ltl_binary(LtlBinaryOp::And, lhs, parse_ltl_until(), loc);
    }
    return lhs;
  }

  LtlPtr parse_ltl_until() {
    auto lhs = parse_ltl_unary();
    if (at_ltl_op("U")) {
      auto loc = take().loc;
      return make_ltl_binary(LtlBinaryOp::Until, lhs, parse_ltl_until(), loc);
    }
    return lhs;
  }

  LtlPtr parse_ltl_unary() {
    SourceLoc loc = cur().loc;
    if (at(Tok::Bang)) {
      take();
      return make_ltl_unary(LtlUnaryOp::Not, parse_ltl_unary(), loc);
    }
    if (at(Tok::Box)) {
      take();
      return make_ltl_unary(LtlUnaryOp::Globally, parse_ltl_unary(), loc);
    }
    if (at(Tok::Diamond)) {
      take();
      return make_ltl_unary(LtlUnaryOp::Finally, parse_ltl_unary(), loc);
    }
    if (at_ltl_op("X")) {
      take();
      return make_ltl_unary(LtlUnaryOp::Next, parse_ltl_unary(), loc);
    }
    if (at_ident("true")) {
      take();
      return make_ltl_const(true, loc);
    }
    if (at_ident("false")) {
      take();
      return make_ltl_const(false, loc);
    }
    if (at(Tok::LParen)) {
      take();
      auto f = parse_ltl();
      expect(Tok::RParen);
      return f;
    }
    if (at(Tok::Ident) && !is_keyword(cur().text) && cur().text != "U") {
      return make_ltl_atom(take().text, loc);
    }
    fail({"LTL formula"});
  }
};

}  // namespace

ModelAst parse_model(std::string_view source) {
  Parser parser(source);
  ModelAst ast = parser.parse_model();
  validate_model(ast);
  return ast;
}

ExprPtr parse_expression(std::string_view source) {
  return Parser(source).parse_standalone_expr();
}

LtlPtr parse_ltl(std::string_view source) {
  return Parser(source).parse_standalone_ltl();
}

AssertionSnippet parse_assertion_snippet(std::string_view source, const ModelAst* context) {
  AssertionSnippet snippet = Parser(source).parse_snippet();
  if (context) {
    ModelAst merged = *context;
    merged.asserts.clear();
    for (const auto& c : snippet.constants) {
      if (!merged.find_constant(c.name)) merged.constants.push_back(c);
    }
    for (const auto& d : snippet.defines) {
      if (const auto* existing = merged.find_define(d.name)) {
        if (!(*existing == d)) {
          throw NameError(d.loc, "#define '" + d.name + "' conflicts with the model's definition");
        }
      } else {
        merged.defines.push_back(d);
      }
    }
    merged.asserts.push_back(snippet.assertion);
    validate_model(merged);
  } else if (const auto* r = std::get_if<Reaches>(&snippet.assertion.kind)) {
    bool found = std::any_of(snippet.defines.begin(), snippet.defines.end(),
                             [&](const DefineDecl& d) { return d.name == r->predicate; });
    if (!found) throw UnknownPredicate(snippet.assertion.loc, r->predicate);
  }
  return snippet;
}

AssertDecl parse_assertion(std::string_view source, const ModelAst* context) {
  return parse_assertion_snippet(source, context).assertion;
}

}  // namespace cspforge::syntax
