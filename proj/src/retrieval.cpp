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

#include "sdvguard/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "sdvguard/errors.hpp"
#include "sdvguard/text.hpp"

namespace sdvguard::retrieval {
namespace {

using Json = nlohmann::json;

std::set<std::string, std::less<>> DistinctTokens(std::string_view s) {
  auto tokens = text::Tokenize(s);
  return {tokens.begin(), tokens.end()};
}

Json PostOrThrow(const http::Endpoint& endpoint, const Json& request,
                 const char* what) {
  const http::Response response = http::PostJson(endpoint, request.dump());
  if (!response.ok()) {
    throw RetrievalError(std::string(what) + " endpoint failed (status " +
                             std::to_string(response.status) + ")" +
                             (response.error.empty() ? "" : ": " + response.error),
                         response.status);
  }
  try {
    return Json::parse(response.body);
  } catch (const Json::parse_error&) {
    throw RetrievalError(std::string(what) + " endpoint returned malformed JSON",
                         response.status);
  }
}

double Cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

RetrievalIndex::RetrievalIndex(std::vector<catalog::CatalogEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigError("retrieval index needs at least one entry");
  std::set<std::string, std::less<>> keys;
  std::size_t total = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!keys.insert(entries_[i].key).second) {
      throw ConfigError("duplicate catalog key in retrieval index: '" +
                        entries_[i].key + "'");
    }
    const auto tokens = text::Tokenize(entries_[i].text);
    std::map<std::string, std::size_t, std::less<>> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [token, count] : tf) postings_[token].push_back({i, count});
    doc_lengths_.push_back(tokens.size());
    entry_tokens_.emplace_back(tokens.begin(), tokens.end());
    total += tokens.size();
  }
  avg_doc_length_ = static_cast<double>(total) / static_cast<double>(entries_.size());
}

RetrievalIndex BuildIndex(std::vector<catalog::CatalogEntry> entries) {
  return RetrievalIndex(std::move(entries));
}

std::vector<double> Bm25Scorer::Score(const RetrievalIndex& index,
                                      std::string_view query) const {
  const std::size_t n_docs = index.entries().size();
  std::vector<double> scores(n_docs, 0.0);
  const double avg = index.avg_doc_length();
  for (const auto& token : DistinctTokens(query)) {
    auto it = index.postings().find(token);
    if (it == index.postings().end()) continue;
    const double df = static_cast<double>(it->second.size());
    const double idf =
        std::log(1.0 + (static_cast<double>(n_docs) - df + 0.5) / (df + 0.5));
    for (const Posting& p : it->second) {
      const double tf = static_cast<double>(p.term_frequency);
      const double dl = static_cast<double>(index.doc_lengths()[p.entry]);
      const double norm = avg > 0.0 ? dl / avg : 0.0;
      scores[p.entry] += idf * tf * (k1_ + 1.0) / (tf + k1_ * (1.0 - b_ + b_ * norm));
    }
  }
  return scores;
}

std::vector<double> EmbeddingScorer::Score(const RetrievalIndex& index,
                                           std::string_view query) const {
  Json request;
  request["texts"] = Json::array({std::string(query)});
  for (const auto& e : index.entries()) request["texts"].push_back(e.text);
  const Json response = PostOrThrow(endpoint_, request, "embedding");
  if (!response.contains("vectors") || !response["vectors"].is_array() ||
      response["vectors"].size() != index.entries().size() + 1) {
    throw RetrievalError("embedding endpoint returned the wrong number of vectors", 200);
  }
  std::vector<std::vector<double>> vectors;
  try {
    vectors = response["vectors"].get<std::vector<std::vector<double>>>();
  } catch (const Json::exception&) {
    throw RetrievalError("embedding endpoint returned non-numeric vectors", 200);
  }
  std::vector<double> scores;
  scores.reserve(index.entries().size());
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    scores.push_back(Cosine(vectors[0], vectors[i]));
  }
  return scores;
}

std::vector<double> OverlapScorer::Score(const RetrievalIndex& index,
                                         std::string_view query,
                                         const std::vector<Candidate>& candidates) const {
  const auto query_tokens = DistinctTokens(query);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    if (query_tokens.empty()) {
      scores.push_back(0.0);
      continue;
    }
    const auto& entry_tokens = index.entry_tokens(c.entry);
    std::size_t hits = 0;
    for (const auto& t : query_tokens) hits += entry_tokens.count(t);
    scores.push_back(static_cast<double>(hits) /
                     static_cast<double>(query_tokens.size()));
  }
  return scores;
}

std::vector<double> CrossEncoderScorer::Score(
    const RetrievalIndex& index, std::string_view query,
    const std::vector<Candidate>& candidates) const {
  Json request;
  request["pairs"] = Json::array();
  for (const Candidate& c : candidates) {
    request["pairs"].push_back(
        Json::array({std::string(query), index.entries()[c.entry].text}));
  }
  const Json response = PostOrThrow(endpoint_, request, "cross-encoder");
  if (!response.contains("scores") || !response["scores"].is_array() ||
      response["scores"].size() != candidates.size()) {
    throw RetrievalError("cross-encoder endpoint returned the wrong number of scores",
                         200);
  }
  try {
    return response["scores"].get<std::vector<double>>();
  } catch (const Json::exception&) {
    throw RetrievalError("cross-encoder endpoint returned non-numeric scores", 200);
  }
}

std::vector<Candidate> ScoreStage1(const RetrievalIndex& index, std::string_view query,
                                   const Stage1Scorer& scorer) {
  if (text::Tokenize(query).empty()) return {};
  const std::vector<double> scores = scorer.Score(index, query);
  std::vector<Candidate> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({i, scores[i], 0.0});
  std::sort(out.begin(), out.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.stage1 != b.stage1) return a.stage1 > b.stage1;
    return index.entries()[a.entry].key < index.entries()[b.entry].key;
  });
  return out;
}

std::vector<Candidate> ScoreStage1(const RetrievalIndex& index, std::string_view query) {
  return ScoreStage1(index, query, Bm25Scorer{});
}

bool RanksBefore(const RetrievalIndex& index, const Candidate& a, const Candidate& b) {
  if (a.stage2 != b.stage2) return a.stage2 > b.stage2;
  if (a.stage1 != b.stage1) return a.stage1 > b.stage1;
  return index.entries()[a.entry].key < index.entries()[b.entry].key;
}

std::vector<Candidate> Rerank(const RetrievalIndex& index, std::vector<Candidate> candidates,
                              std::string_view query, const PairScorer& scorer) {
  const std::vector<double> scores = scorer.Score(index, query, candidates);
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].stage2 = scores[i];
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) { return RanksBefore(index, a, b); });
  return candidates;
}

std::vector<Candidate> Rerank(const RetrievalIndex& index, std::vector<Candidate> candidates,
                              std::string_view query) {
  return Rerank(index, std::move(candidates), query, OverlapScorer{});
}

ShortList RetrieveTopK(const RetrievalIndex& index, std::string_view query, std::size_t k,
                       const RetrievalOptions& options) {
  if (k == 0) throw ConfigError("top-k must be at least 1");
  const Bm25Scorer bm25;
  const OverlapScorer overlap;
  const Stage1Scorer& stage1 = options.stage1 ? *options.stage1 : bm25;
  const PairScorer& stage2 = options.stage2 ? *options.stage2 : overlap;

  std::vector<Candidate> pool = ScoreStage1(index, query, stage1);
  const std::size_t pool_size =
      std::min(options.pool_multiplier * k, index.entries().size());
  if (pool.size() > pool_size) pool.resize(pool_size);
  std::vector<Candidate> ranked = Rerank(index, std::move(pool), query, stage2);
  if (ranked.size() > k) ranked.resize(k);

  ShortList out;
  out.query = std::string(query);
  out.k = k;
  for (const Candidate& c : ranked) {
    out.ranked.push_back({index.entries()[c.entry], c.stage1, c.stage2});
  }
  return out;
}

std::size_t EstimateTokens(std::string_view s) {
  std::size_t code_points = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++code_points;
  }
  return (code_points + 3) / 4;
}

std::vector<Chunk> ChunkEntries(const ShortList& shortlist, std::size_t token_budget) {
  if (token_budget == 0) throw ConfigError("token budget must be at least 1");
  std::vector<Chunk> chunks;
  Chunk current;
  for (const RankedEntry& r : shortlist.ranked) {
    const std::size_t cost = EstimateTokens(r.entry.text);
    if (cost > token_budget) {
      throw ChunkingError("entry '" + r.entry.key + "' needs " + std::to_string(cost) +
                          " tokens, over the budget of " + std::to_string(token_budget));
    }
    if (!current.entries.empty() && current.token_estimate + cost > token_budget) {
      chunks.push_back(std::move(current));
      current = Chunk{};
    }
    current.entries.push_back(r);
    current.token_estimate += cost;
  }
  if (!current.entries.empty()) chunks.push_back(std::move(current));
  return chunks;
}

}  // namespace sdvguard::retrieval
