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

#include "cspforge/syntax/lexer.hpp"

#include <cctype>
#include <sstream>

namespace cspforge::syntax {

namespace {

std::string describe(SourceLoc loc, const std::set<std::string>& expected,
                     const std::string& found, const std::string& detail) {
  std::ostringstream os;
  os << loc.line << ":" << loc.column << ": ";
  if (!detail.empty()) {
    os << detail;
  } else {
    os << "expected ";
    if (expected.size() > 1) os << "one of ";
    bool first = true;
    for (const auto& e : expected) {
      if (!first) os << ", ";
      os << e;
      first = false;
    }
  }
  os << " (found " << (found.empty() ? "end of input" : "'" + found + "'") << ")";
  return os.str();
}

std::string located(SourceLoc loc, const std::string& message) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + message;
}

}  // namespace

SyntaxError::SyntaxError(SourceLoc loc, std::set<std::string> expected,
                         std::string found, std::string detail)
    : Error("SyntaxError", describe(loc, expected, found, detail)),
      loc_(loc),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

NameError::NameError(SourceLoc loc, const std::string& message, std::string kind)
    : Error(std::move(kind), located(loc, message)), loc_(loc) {}

UnknownPredicate::UnknownPredicate(SourceLoc loc, const std::string& name)
    : NameError(loc, "'" + name + "' is not a #define predicate", "UnknownPredicate") {}

std::string_view token_name(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Directive: return "directive";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Box: return "'[]'";
    case Tok::Diamond: return "'<>'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::DotDot: return "'..'";
    case Tok::Assign: return "'='";
    case Tok::Eq: return "'=='";
    case Tok::Ne: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::Bang: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Interleave: return "'|||'";
    case Tok::Arrow: return "'->'";
    case Tok::Models: return "'|='";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto peek = [&](std::size_t off) -> char {
    return i + off < src.size() ? src[i + off] : '\0';
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && peek(1) == '*') {
      SourceLoc start{line, col};
      advance(2);
      while (i < src.size() && !(src[i] == '*' && peek(1) == '/')) advance(1);
      if (i >= src.size()) throw SyntaxError(start, {"'*/'"}, "", "unterminated comment");
      advance(2);
      continue;
    }

    SourceLoc loc{line, col};
    auto emit = [&](Tok kind, std::size_t len) {
      out.push_back(Token{kind, std::string(src.substr(i, len)), loc});
      advance(len);
    };

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      emit(Tok::Ident, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j - i > 18) throw SyntaxError(loc, {"integer"}, std::string(src.substr(i, j - i)),
                                        "integer literal too large");
      emit(Tok::Int, j - i);
      continue;
    }
    if (c == '#') {
      std::size_t j = i + 1;
      while (j < src.size() && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
      std::string word(src.substr(i, j - i));
      if (word != "#define" && word != "#assert") {
        throw SyntaxError(loc, {"#define", "#assert"}, word);
      }
      emit(Tok::Directive, j - i);
      continue;
    }

    char n = peek(1);
    switch (c) {
      case '(': emit(Tok::LParen, 1); continue;
      case ')': emit(Tok::RParen, 1); continue;
      case '{': emit(Tok::LBrace, 1); continue;
      case '}': emit(Tok::RBrace, 1); continue;
      case '[':
        if (n == ']') emit(Tok::Box, 2);
        else emit(Tok::LBracket, 1);
        continue;
      case ']': emit(Tok::RBracket, 1); continue;
      case ',': emit(Tok::Comma, 1); continue;
      case ';': emit(Tok::Semi, 1); continue;
      case ':': emit(Tok::Colon, 1); continue;
      case '.':
        if (n == '.') {
          emit(Tok::DotDot, 2);
          continue;
        }
        break;
      case '=':
        if (n == '=') emit(Tok::Eq, 2);
        else emit(Tok::Assign, 1);
        continue;
      case '!':
        if (n == '=') emit(Tok::Ne, 2);
        else emit(Tok::Bang, 1);
        continue;
      case '<':
        if (n == '>') emit(Tok::Diamond, 2);
        else if (n == '=') emit(Tok::Le, 2);
        else emit(Tok::Lt, 1);
        continue;
      case '>':
        if (n == '=') emit(Tok::Ge, 2);
        else emit(Tok::Gt, 1);
        continue;
      case '+': emit(Tok::Plus, 1); continue;
      case '-':
        if (n == '>') emit(Tok::Arrow, 2);
        else emit(Tok::Minus, 1);
        continue;
      case '*': emit(Tok::Star, 1); continue;
      case '/': emit(Tok::Slash, 1); continue;
      case '%': emit(Tok::Percent, 1); continue;
      case '&':
        if (n == '&') {
          emit(Tok::AndAnd, 2);
          continue;
        }
        break;
      case '|':
        if (n == '|' && peek(2) == '|') emit(Tok::Interleave, 3);
        else if (n == '|') emit(Tok::OrOr, 2);
        else if (n == '=') emit(Tok::Models, 2);
        else break;
        continue;
      default:
        break;
    }
    throw SyntaxError(loc, {}, std::string(1, c), "unexpected character");
  }
  out.push_back(Token{Tok::End, "", SourceLoc{line, col}});
  return out;
}

}  // namespace cspforge::syntax
