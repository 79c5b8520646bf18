// Copyright 2026 The sdv-guard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small string and file helpers shared by every module.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sdvguard::text {

std::string_view Trim(std::string_view s);
std::string ToLower(std::string_view s);
bool StartsWith(std::string_view s, std::string_view prefix);

// Lowercase, every run of non-alphanumerics becomes one hyphen, leading and
// trailing hyphens removed. Idempotent.
std::string NormalizeName(std::string_view s);

// Lowercase, split on non-alphanumerics, empty tokens dropped.
std::vector<std::string> Tokenize(std::string_view s);

std::vector<std::string> SplitLines(std::string_view s);

// Lowercase hex SHA-256 of the exact bytes.
std::string Sha256Hex(std::string_view bytes);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);

// 1-based (line, column) of a byte offset.
std::pair<std::size_t, std::size_t> LineColumn(std::string_view s,
                                               std::size_t offset);

// Strict decimal parse of the whole (trimmed) string. Rejects inf/nan.
std::optional<double> ParseReal(std::string_view s);
std::optional<long long> ParseInteger(std::string_view s);

// Shortest round-trippable form; always contains '.' or an exponent so the
// text reads back as a real.
std::string FormatReal(double v);

// If `s` contains a ``` fenced block, returns its body; otherwise `s`.
std::string StripCodeFence(std::string_view s);

// Extracts the first "@startuml ... @enduml" block (inclusive), if any.
std::optional<std::string> ExtractPlantUmlBlock(std::string_view s);

// '*' matches any run of characters; everything else is literal.
bool GlobMatch(std::string_view pattern, std::string_view s);

}  // namespace sdvguard::text
