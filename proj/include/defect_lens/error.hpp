// Copyright 2026 The defect-lens Authors
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

#ifndef DEFECT_LENS_ERROR_HPP
#define DEFECT_LENS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace defect_lens {

/// Broad failure classes. The C API maps each to a status code and the CLI
/// maps them to exit codes.
enum class ErrorKind {
  kInvalidArgument,  // precondition violated by the caller
  kDomain,           // inputs valid individually but the quantity is undefined
  kParse,            // malformed input file
  kIo,               // filesystem failure
  kNumerical,        // iterative method failed to converge under strict mode
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::kInvalidArgument, what);
}

}  // namespace defect_lens

#endif  // DEFECT_LENS_ERROR_HPP
