// include/rdlab/io.h

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

#ifndef RDLAB_IO_H_
#define RDLAB_IO_H_

#include <string>

namespace rdlab {

/// Writes to `path.tmp` and renames over `path`, so readers never observe a
/// partially written file.
void write_file_atomic(const std::string& path, const std::string& content);

/// Throws DataError when the file cannot be opened.
std::string read_file(const std::string& path);

}  // namespace rdlab

#endif  // RDLAB_IO_H_
