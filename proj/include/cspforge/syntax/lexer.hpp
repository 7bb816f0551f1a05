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

#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cspforge/common/error.hpp"
#include "cspforge/syntax/ast.hpp"

namespace cspforge::syntax {

enum class Tok {
  End,
  Ident,
  Int,
  Directive,  // `#define`, `#assert`
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Box,        // []
  Diamond,    // <>
  Comma,
  Semi,
  Colon,
  DotDot,
  Assign,     // =
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Bang,
  AndAnd,
  OrOr,
  Interleave, // |||
  Arrow,      // ->
  Models,     // |=
};

std::string_view token_name(Tok t);

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

/// Parse failure. `expected` lists the token spellings that would have been
/// accepted at `loc`.
class SyntaxError : public Error {
 public:
  SyntaxError(SourceLoc loc, std::set<std::string> expected, std::string found,
              std::string detail = {});

  const SourceLoc& location() const noexcept { return loc_; }
  const std::set<std::string>& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  SourceLoc loc_;
  std::set<std::string> expected_;
  std::string found_;
};

/// Duplicate or unresolved identifier.
class NameError : public Error {
 public:
  NameError(SourceLoc loc, const std::string& message, std::string kind = "NameError");
  const SourceLoc& location() const noexcept { return loc_; }

 private:
  SourceLoc loc_;
};

/// `reaches` target that is not a #define.
class UnknownPredicate : public NameError {
 public:
  UnknownPredicate(SourceLoc loc, const std::string& name);
};

std::vector<Token> tokenize(std::string_view source);

}  // namespace cspforge::syntax
