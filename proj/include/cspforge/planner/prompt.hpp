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

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "cspforge/common/error.hpp"
#include "cspforge/llm/backend.hpp"

namespace cspforge::planner {

CSPFORGE_DEFINE_ERROR(TemplateError);

/// Four-part instruction for one extraction or generation task.
struct SemanticPrompt {
  std::string role;
  std::string context;
  std::string structure;
  std::vector<std::string> rules;

  /// Throws TemplateError when any part is empty.
  void check_complete() const;
  /// System message carries the role; the user message the other three parts.
  llm::ChatRequest to_request(llm::ResponseFormat format) const;
};

/// Text template with [role], [context], [structure] and [rules] sections
/// and {placeholder} slots (lowercase letters and underscores). Each line of
/// the rules section starting with "- " is one rule.
class PromptTemplate {
 public:
  static PromptTemplate parse(const std::string& text, const std::string& name = "template");
  static PromptTemplate load(const std::string& path);

  /// Fills every slot by name; throws TemplateError naming unfilled slots.
  SemanticPrompt fill(const std::map<std::string, std::string>& values) const;

  std::vector<std::string> placeholders() const;
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  std::map<std::string, std::string> sections_;
};

/// Named templates read from a directory (`<name>.txt`), loaded once.
class PromptLibrary {
 public:
  explicit PromptLibrary(std::string dir = default_dir());
  static std::string default_dir();

  const PromptTemplate& get(const std::string& name) const;
  const std::string& dir() const noexcept { return dir_; }

 private:
  std::string dir_;
  struct Cache {
    std::mutex mutex;
    std::map<std::string, PromptTemplate> templates;
  };
  std::shared_ptr<Cache> cache_;  // shared by copies
};

}  // namespace cspforge::planner
