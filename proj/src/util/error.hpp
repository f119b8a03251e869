// Copyright (c) 2026 nnSpeech Authors
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

#ifndef NNSPEECH_UTIL_ERROR_HPP_
#define NNSPEECH_UTIL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace nns {

enum class ErrorKind {
  kInvalidArgument,  // bad config, invariant violation, shape mismatch
  kIo,               // file missing, corrupt header, write failure
  kRuntime,          // divergence, internal failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void ThrowInvalid(const std::string& msg) {
  throw Error(ErrorKind::kInvalidArgument, msg);
}
[[noreturn]] inline void ThrowIo(const std::string& msg) {
  throw Error(ErrorKind::kIo, msg);
}
[[noreturn]] inline void ThrowRuntime(const std::string& msg) {
  throw Error(ErrorKind::kRuntime, msg);
}

}  // namespace nns

#endif  // NNSPEECH_UTIL_ERROR_HPP_
