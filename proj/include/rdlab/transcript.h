// include/rdlab/transcript.h

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

#ifndef RDLAB_TRANSCRIPT_H_
#define RDLAB_TRANSCRIPT_H_

#include <string>
#include <vector>

namespace rdlab {

/// One word with its functional role and the speaker who said it. Speakers
/// distinguish several people sharing a role (OTH1, OTH2, ...); when unset
/// the speaker is the role itself.
struct WordLabel {
  std::string text;
  std::string role;
  std::string speaker;

  const std::string& speaker_or_role() const {
    return speaker.empty() ? role : speaker;
  }
  bool operator==(const WordLabel&) const = default;
};

using RoleTranscript = std::vector<WordLabel>;

}  // namespace rdlab

#endif  // RDLAB_TRANSCRIPT_H_
