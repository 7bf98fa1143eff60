//
// Copyright 2026 The augscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef AUGSCORE_ERROR_HPP_
#define AUGSCORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace augscore {

// Values mirror augscore_status in augscore.h.
enum class ErrorCode {
  kInvalidArgument = 1,
  kParse = 2,
  kIo = 3,
  kValidation = 4,
  kInfeasible = 5,
  kGeneration = 6,
  kNumeric = 7,
  kNotFound = 8,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace augscore

#endif  // AUGSCORE_ERROR_HPP_
