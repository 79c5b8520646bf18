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

// Hand-computed BM25 scores for a three-document corpus.

#pragma once

#include <array>
#include <cmath>
#include <string>

#include "sdvguard/catalog.hpp"
#include "sdvguard/retrieval.hpp"

namespace sdvguard::testing::oracle {

inline catalog::CatalogEntry Doc(const std::string& key, const std::string& text) {
  catalog::CatalogEntry e;
  e.key = key;
  e.text = text;
  return e;
}

// d0 "brake pedal" (2 tokens), d1 "brake request brake" (3), d2 "speed target" (2).
inline retrieval::RetrievalIndex ThreeDocs() {
  return retrieval::RetrievalIndex({Doc("d0", "brake pedal"), Doc("d1", "brake request brake"),
                                    Doc("d2", "speed target")});
}

inline constexpr const char* kThreeDocQuery = "brake target brake";

// Scores of kThreeDocQuery against ThreeDocs(), in document order.
inline std::array<double, 3> ThreeDocScores() {
  // k1 = 1.2, b = 0.75, N = 3, avgdl = 7/3.
  // "brake": df = 2, idf = ln(1 + 1.5 / 2.5) = ln 1.6.
  //   d0: tf 1, dl 2 -> 2.2 / (1 + 1.2 * (0.25 + 0.75 * 6/7))
  //   d1: tf 2, dl 3 -> 4.4 / (2 + 1.2 * (0.25 + 0.75 * 9/7))
  // "target": df = 1, idf = ln(1 + 2.5 / 1.5) = ln(8/3).
  //   d2: tf 1, dl 2 -> 2.2 / (1 + 1.2 * (0.25 + 0.75 * 6/7))
  const double idf_brake = std::log(1.6);
  const double idf_target = std::log(8.0 / 3.0);
  const double short_doc = 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 6.0 / 7.0));
  const double long_doc = 4.4 / (2.0 + 1.2 * (0.25 + 0.75 * 9.0 / 7.0));
  return {idf_brake * short_doc, idf_brake * long_doc, idf_target * short_doc};
}

}  // namespace sdvguard::testing::oracle
