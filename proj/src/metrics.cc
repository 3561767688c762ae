// src/metrics.cc

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

#include "rdlab/metrics.h"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>

namespace rdlab {

std::size_t WordAlignment::distance() const {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(),
                    [](const EditOp& op) { return op.kind != EditKind::kMatch; }));
}

std::string normalize_word(const std::string& word) {
  std::size_t b = 0, e = word.size();
  while (b < e && std::isspace(static_cast<unsigned char>(word[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(word[e - 1]))) --e;
  std::string out = word.substr(b, e - b);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

WordAlignment align_words(std::span<const std::string> ref,
                          std::span<const std::string> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::string> r(n), h(m);
  std::transform(ref.begin(), ref.end(), r.begin(), normalize_word);
  std::transform(hyp.begin(), hyp.end(), h.begin(), normalize_word);

  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (r[i - 1] == h[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  WordAlignment out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = r[i - 1] == h[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        out.ops.push_back({same ? EditKind::kMatch : EditKind::kSubstitute, i - 1, j - 1});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      out.ops.push_back({EditKind::kDelete, i - 1, std::nullopt});
      --i;
    } else {
      out.ops.push_back({EditKind::kInsert, std::nullopt, j - 1});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

std::vector<std::string> word_texts(const RoleTranscript& transcript) {
  std::vector<std::string> out;
  out.reserve(transcript.size());
  for (const auto& w : transcript) out.push_back(w.text);
  return out;
}

double ErrorCounts::rate() const {
  const std::int64_t n = reference_length();
  const std::int64_t errors = substitutions + deletions + insertions;
  if (n == 0) return errors > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return static_cast<double>(errors) / static_cast<double>(n);
}

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  correct += o.correct;
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  return *this;
}

ErrorCounts wer(const WordAlignment& alignment) {
  ErrorCounts c;
  for (const auto& op : alignment.ops) {
    switch (op.kind) {
      case EditKind::kMatch: ++c.correct; break;
      case EditKind::kSubstitute: ++c.substitutions; break;
      case EditKind::kDelete: ++c.deletions; break;
      case EditKind::kInsert: ++c.insertions; break;
    }
  }
  return c;
}

std::optional<double> RoleErrorCounts::rate() const {
  if (pairs == 0) return std::nullopt;
  return static_cast<double>(errors) / static_cast<double>(pairs);
}

RoleErrorCounts& RoleErrorCounts::operator+=(const RoleErrorCounts& o) {
  errors += o.errors;
  pairs += o.pairs;
  return *this;
}

namespace {

bool aligned_pair(const EditOp& op) {
  return op.kind == EditKind::kMatch || op.kind == EditKind::kSubstitute;
}

void check_alignment(const RoleTranscript& ref, const RoleTranscript& hyp,
                     const WordAlignment& alignment) {
  for (const auto& op : alignment.ops) {
    if ((op.ref && *op.ref >= ref.size()) || (op.hyp && *op.hyp >= hyp.size())) {
      throw std::invalid_argument("alignment index out of range for transcripts");
    }
  }
}

}  // namespace

RoleErrorCounts wder_counts(const RoleTranscript& ref, const RoleTranscript& hyp,
                            const WordAlignment& alignment) {
  check_alignment(ref, hyp, alignment);
  RoleErrorCounts c;
  for (const auto& op : alignment.ops) {
    if (!aligned_pair(op)) continue;
    ++c.pairs;
    if (ref[*op.ref].role != hyp[*op.hyp].role) ++c.errors;
  }
  return c;
}

std::optional<double> wder(const RoleTranscript& ref, const RoleTranscript& hyp,
                           const WordAlignment& alignment) {
  return wder_counts(ref, hyp, alignment).rate();
}

RoleErrorCounts r_wder_counts(const RoleTranscript& ref, const RoleTranscript& hyp,
                              const WordAlignment& alignment,
                              const RoleNames& names) {
  check_alignment(ref, hyp, alignment);
  // Votes for each other-role reference speaker from other-role hypotheses.
  std::map<std::string, std::int64_t> votes;
  for (const auto& w : ref) {
    if (w.role == names.other) votes.emplace(w.speaker_or_role(), 0);
  }
  for (const auto& op : alignment.ops) {
    if (!aligned_pair(op)) continue;
    const WordLabel& r = ref[*op.ref];
    if (hyp[*op.hyp].role == names.other && r.role == names.other) {
      ++votes[r.speaker_or_role()];
    }
  }
  std::optional<std::string> chosen;
  std::int64_t best = -1;
  for (const auto& [speaker, count] : votes) {
    if (count > best) {
      best = count;
      chosen = speaker;
    }
  }

  RoleErrorCounts c;
  for (const auto& op : alignment.ops) {
    if (!aligned_pair(op)) continue;
    ++c.pairs;
    const WordLabel& r = ref[*op.ref];
    const std::string& role = hyp[*op.hyp].role;
    bool ok = false;
    if (role == names.doctor || role == names.patient) {
      ok = r.role == role;
    } else if (role == names.other) {
      ok = r.role == names.other && chosen && r.speaker_or_role() == *chosen;
    }
    if (!ok) ++c.errors;
  }
  return c;
}

std::optional<double> r_wder(const RoleTranscript& ref, const RoleTranscript& hyp,
                             const WordAlignment& alignment, const RoleNames& names) {
  return r_wder_counts(ref, hyp, alignment, names).rate();
}

void count_deletions(std::span<const std::string> ref, const WordAlignment& alignment,
                     std::map<std::string, std::int64_t>& counts) {
  for (const auto& op : alignment.ops) {
    if (op.kind == EditKind::kDelete) ++counts[normalize_word(ref[*op.ref])];
  }
}

DeletionHistogram deletion_histogram(const std::map<std::string, std::int64_t>& counts) {
  DeletionHistogram h;
  for (const auto& [word, count] : counts) {
    if (count > 0) h.push_back({word, count});
  }
  std::stable_sort(h.begin(), h.end(), [](const DeletionCount& a, const DeletionCount& b) {
    return a.count > b.count;
  });
  return h;
}

std::vector<std::string> top_deleted(const DeletionHistogram& histogram, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < histogram.size() && i < n; ++i) {
    out.push_back(histogram[i].word);
  }
  return out;
}

CorpusScore score_corpus(std::span<const std::string> ids,
                         std::span<const RoleTranscript> refs,
                         std::span<const RoleTranscript> hyps,
                         const RoleNames& names) {
  if (ids.size() != refs.size() || refs.size() != hyps.size()) {
    throw std::invalid_argument("score_corpus: mismatched corpus sizes");
  }
  CorpusScore score;
  std::map<std::string, std::int64_t> deleted;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto ref_words = word_texts(refs[i]);
    const auto alignment = align_words(ref_words, word_texts(hyps[i]));
    UtteranceScore u{ids[i], wer(alignment),
                     wder_counts(refs[i], hyps[i], alignment),
                     r_wder_counts(refs[i], hyps[i], alignment, names)};
    score.counts += u.counts;
    score.wder += u.wder;
    score.r_wder += u.r_wder;
    count_deletions(ref_words, alignment, deleted);
    score.utterances.push_back(std::move(u));
  }
  score.deletions = deletion_histogram(deleted);
  return score;
}

}  // namespace rdlab
