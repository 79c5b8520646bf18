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

// Two-stage retrieve-and-rerank over catalog entries, plus budgeted chunking
// of the resulting shortlist.
//
// Stage 1 is a pluggable scorer over the whole index (BM25 by default, or
// cosine similarity of vectors from an embedding endpoint). Stage 2 rescores
// the stage-1 pool pairwise (query-token overlap by default, or a
// cross-encoder endpoint). All default scorers are deterministic.

#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sdvguard/catalog.hpp"
#include "sdvguard/http.hpp"

namespace sdvguard::retrieval {

struct Posting {
  std::size_t entry = 0;
  std::size_t term_frequency = 0;

  bool operator==(const Posting&) const = default;
};

class RetrievalIndex {
 public:
  // Throws ConfigError on an empty list or duplicate keys.
  explicit RetrievalIndex(std::vector<catalog::CatalogEntry> entries);

  const std::vector<catalog::CatalogEntry>& entries() const { return entries_; }
  const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const {
    return postings_;
  }
  const std::vector<std::size_t>& doc_lengths() const { return doc_lengths_; }
  double avg_doc_length() const { return avg_doc_length_; }
  const std::set<std::string, std::less<>>& entry_tokens(std::size_t i) const {
    return entry_tokens_[i];
  }

 private:
  std::vector<catalog::CatalogEntry> entries_;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::vector<std::size_t> doc_lengths_;
  std::vector<std::set<std::string, std::less<>>> entry_tokens_;
  double avg_doc_length_ = 0.0;
};

RetrievalIndex BuildIndex(std::vector<catalog::CatalogEntry> entries);

struct Candidate {
  std::size_t entry = 0;
  double stage1 = 0.0;
  double stage2 = 0.0;
};

class Stage1Scorer {
 public:
  virtual ~Stage1Scorer() = default;
  // One score per index entry, in index order.
  virtual std::vector<double> Score(const RetrievalIndex& index,
                                    std::string_view query) const = 0;
};

// Okapi BM25 with the non-negative idf  ln(1 + (N - n + 0.5) / (n + 0.5)).
// Each distinct query token contributes once.
class Bm25Scorer final : public Stage1Scorer {
 public:
  explicit Bm25Scorer(double k1 = 1.2, double b = 0.75) : k1_(k1), b_(b) {}
  std::vector<double> Score(const RetrievalIndex& index,
                            std::string_view query) const override;

 private:
  double k1_;
  double b_;
};

// POST {texts:[query, entry...]} -> {vectors:[[...]...]}; cosine similarity.
class EmbeddingScorer final : public Stage1Scorer {
 public:
  explicit EmbeddingScorer(http::Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<double> Score(const RetrievalIndex& index,
                            std::string_view query) const override;

 private:
  http::Endpoint endpoint_;
};

class PairScorer {
 public:
  virtual ~PairScorer() = default;
  // One score per candidate, in candidate order.
  virtual std::vector<double> Score(const RetrievalIndex& index, std::string_view query,
                                    const std::vector<Candidate>& candidates) const = 0;
};

// Fraction of distinct query tokens present in the entry text.
class OverlapScorer final : public PairScorer {
 public:
  std::vector<double> Score(const RetrievalIndex& index, std::string_view query,
                            const std::vector<Candidate>& candidates) const override;
};

// POST {pairs:[[query, text]...]} -> {scores:[...]}.
class CrossEncoderScorer final : public PairScorer {
 public:
  explicit CrossEncoderScorer(http::Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<double> Score(const RetrievalIndex& index, std::string_view query,
                            const std::vector<Candidate>& candidates) const override;

 private:
  http::Endpoint endpoint_;
};

// Every entry, ordered by stage-1 score descending then key ascending.
// A query with no tokens yields an empty list.
std::vector<Candidate> ScoreStage1(const RetrievalIndex& index, std::string_view query,
                                   const Stage1Scorer& scorer);
std::vector<Candidate> ScoreStage1(const RetrievalIndex& index, std::string_view query);

// Order: stage2 desc, stage1 desc, key asc.
std::vector<Candidate> Rerank(const RetrievalIndex& index, std::vector<Candidate> candidates,
                              std::string_view query, const PairScorer& scorer);
std::vector<Candidate> Rerank(const RetrievalIndex& index, std::vector<Candidate> candidates,
                              std::string_view query);

// Strict weak ordering used by Rerank.
bool RanksBefore(const RetrievalIndex& index, const Candidate& a, const Candidate& b);

struct RankedEntry {
  catalog::CatalogEntry entry;
  double stage1 = 0.0;
  double stage2 = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

struct ShortList {
  std::string query;
  std::vector<RankedEntry> ranked;
  std::size_t k = 0;

  bool operator==(const ShortList&) const = default;
};

struct RetrievalOptions {
  std::size_t pool_multiplier = 4;
  const Stage1Scorer* stage1 = nullptr;  // null: BM25
  const PairScorer* stage2 = nullptr;    // null: token overlap
};

ShortList RetrieveTopK(const RetrievalIndex& index, std::string_view query, std::size_t k,
                       const RetrievalOptions& options = {});

struct Chunk {
  std::vector<RankedEntry> entries;
  std::size_t token_estimate = 0;
};

// ceil(code points / 4).
std::size_t EstimateTokens(std::string_view text);

// Greedy packing in rank order. Throws ChunkingError naming any entry that
// alone exceeds the budget.
std::vector<Chunk> ChunkEntries(const ShortList& shortlist, std::size_t token_budget);

}  // namespace sdvguard::retrieval
