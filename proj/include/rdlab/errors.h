// include/rdlab/errors.h

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

#ifndef RDLAB_ERRORS_H_
#define RDLAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rdlab {

// Contract violations (bad shapes, out-of-range indices) are reported with
// std::invalid_argument. The two classes below separate failures that the CLI
// maps to distinct exit codes.

/// Malformed or inconsistent input files and records.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values produced during training or inference.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rdlab

#endif  // RDLAB_ERRORS_H_
