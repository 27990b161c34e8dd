// Copyright 2026 The mcstein Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcstein {

enum class ErrorCode {
  out_of_range_probability,
  empty_model,
  length_mismatch,
  index_out_of_range,
  non_integer_value,
  enumeration_cap_exceeded,
  invalid_contraction_indices,
  order_mismatch,
  malformed_field,
  invalid_lambda,
  range_too_short,
  order_too_small,
  too_few_samples,
  spec_parse_error,
  invalid_argument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::out_of_range_probability: return "OutOfRangeProbability";
    case ErrorCode::empty_model: return "EmptyModel";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::non_integer_value: return "NonIntegerValue";
    case ErrorCode::enumeration_cap_exceeded: return "EnumerationCapExceeded";
    case ErrorCode::invalid_contraction_indices: return "InvalidContractionIndices";
    case ErrorCode::order_mismatch: return "OrderMismatch";
    case ErrorCode::malformed_field: return "MalformedField";
    case ErrorCode::invalid_lambda: return "InvalidLambda";
    case ErrorCode::range_too_short: return "RangeTooShort";
    case ErrorCode::order_too_small: return "OrderTooSmall";
    case ErrorCode::too_few_samples: return "TooFewSamples";
    case ErrorCode::spec_parse_error: return "SpecParseError";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code identifies the contract that
/// was violated; the message carries the offending values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mcstein
