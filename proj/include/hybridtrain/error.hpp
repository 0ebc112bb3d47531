// Copyright 2026 The hybridtrain Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hybridtrain {

/// Broad failure classes. The CLI maps each category to its own exit code.
enum class ErrorCategory {
  kParse = 3,
  kValidation = 4,
  kAdmission = 5,
  kTraining = 6,
  kState = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

inline Error ParseError(const std::string& what) { return {ErrorCategory::kParse, what}; }
inline Error ValidationError(const std::string& what) {
  return {ErrorCategory::kValidation, what};
}
inline Error AdmissionError(const std::string& what) {
  return {ErrorCategory::kAdmission, what};
}
inline Error TrainingError(const std::string& what) { return {ErrorCategory::kTraining, what}; }
inline Error StateError(const std::string& what) { return {ErrorCategory::kState, what}; }

}  // namespace hybridtrain
