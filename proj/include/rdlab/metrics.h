// include/rdlab/metrics.h

// Copyright 2026  rdlab authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef RDLAB_METRICS_H_
#define RDLAB_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdlab/transcript.h"

namespace rdlab {

enum class EditKind { kMatch, kSubstitute, kDelete, kInsert };

struct EditOp {
  EditKind kind;
  std::optional<std::size_t> ref;
  std::optional<std::size_t> hyp;
  bool operator==(const EditOp&) const = default;
};

struct WordAlignment {
  std::vector<EditOp> ops;
  std::size_t distance() const;
};

/// Lowercased, whitespace-trimmed form used for all word comparisons.
std::string normalize_word(const std::string& word);

/// Unit-cost Levenshtein alignment. The backtrace prefers the diagonal
/// (match or substitute), then deletion, then insertion.
WordAlignment align_words(std::span<const std::string> ref,
                          std::span<const std::string> hyp);

std::vector<std::string> word_texts(const RoleTranscript& transcript);

struct ErrorCounts {
  std::int64_t correct = 0;
  std::int64_t substitutions = 0;
  std::int64_t deletions = 0;
  std::int64_t insertions = 0;

  std::int64_t reference_length() const {
    return correct + substitutions + deletions;
  }
  /// (S+D+I)/N; +inf when N == 0 and I > 0, 0 when both are zero.
  double rate() const;
  ErrorCounts& operator+=(const ErrorCounts& other);
  bool operator==(const ErrorCounts&) const = default;
};

ErrorCounts wer(const WordAlignment& alignment);

/// Wrong-role pairs over aligned (match or substitute) pairs.
struct RoleErrorCounts {
  std::int64_t errors = 0;
  std::int64_t pairs = 0;

  /// Undefined when there are no aligned pairs.
  std::optional<double> rate() const;
  RoleErrorCounts& operator+=(const RoleErrorCounts& other);
  bool operator==(const RoleErrorCounts&) const = default;
};

RoleErrorCounts wder_counts(const RoleTranscript& ref, const RoleTranscript& hyp,
                            const WordAlignment& alignment);
std::optional<double> wder(const RoleTranscript& ref, const RoleTranscript& hyp,
                           const WordAlignment& alignment);

struct RoleNames {
  std::string doctor = "DOC";
  std::string patient = "PAT";
  std::string other = "OTH";
};

/// Role-constrained WDER. Doctor and patient hypotheses are correct only
/// against reference words of the same role. Other-role hypotheses are scored
/// against the one reference speaker of the other role that maximizes their
/// correct matches in this utterance (ties go to the smaller name).
RoleErrorCounts r_wder_counts(const RoleTranscript& ref, const RoleTranscript& hyp,
                              const WordAlignment& alignment,
                              const RoleNames& names = {});
std::optional<double> r_wder(const RoleTranscript& ref, const RoleTranscript& hyp,
                             const WordAlignment& alignment,
                             const RoleNames& names = {});

struct DeletionCount {
  std::string word;
  std::int64_t count = 0;
  bool operator==(const DeletionCount&) const = default;
};

/// Sorted by count (descending), then word.
using DeletionHistogram = std::vector<DeletionCount>;

void count_deletions(std::span<const std::string> ref,
                     const WordAlignment& alignment,
                     std::map<std::string, std::int64_t>& counts);
DeletionHistogram deletion_histogram(
    const std::map<std::string, std::int64_t>& counts);
std::vector<std::string> top_deleted(const DeletionHistogram& histogram,
                                     std::size_t n);

struct UtteranceScore {
  std::string id;
  ErrorCounts counts;
  RoleErrorCounts wder;
  RoleErrorCounts r_wder;
};

struct CorpusScore {
  ErrorCounts counts;
  RoleErrorCounts wder;
  RoleErrorCounts r_wder;
  std::vector<UtteranceScore> utterances;
  DeletionHistogram deletions;
};

/// Scores paired transcripts; rates aggregate counts over the corpus.
CorpusScore score_corpus(std::span<const std::string> ids,
                         std::span<const RoleTranscript> refs,
                         std::span<const RoleTranscript> hyps,
                         const RoleNames& names = {});

}  // namespace rdlab

#endif  // RDLAB_METRICS_H_
