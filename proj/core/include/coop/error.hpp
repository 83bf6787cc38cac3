// Copyright 2026 The coop Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coop {

enum class ErrorCode {
    // corpus
    InvalidEncoding,
    EmptyDocument,
    DuplicateReportId,
    EmptyCorpus,
    InvalidInput,
    InvalidConfig,
    // prompting
    TemplateInvalid,
    MissingPlaceholder,
    EmptyFinalAnswer,
    // inference
    EndpointUnavailable,
    OutputTruncated,
    MalformedResponse,
    RequestRejected,
    UnterminatedThinking,
    // extraction
    ExtractionUnparseable,
    CategoryUnknown,
    // labeling
    MixedCaseInput,
    IncompleteRun,
    // sampling / validation
    StratumExhausted,
    NotInSample,
    DuplicateAnnotation,
    PassageNotInReport,
    UnknownReviewer,
    Forbidden,
    IncompleteAnnotations,
    UnresolvedRemaining,
    UnknownItem,
    NoteRequired,
    // metrics
    LengthMismatch,
    EmptyInput,
    // orchestration
    ConfigInvalid,
    RunLocked,
    FailureThresholdExceeded,
    Interrupted,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Every module reports failures
/// through this type; the HTTP layer maps codes to status lines.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace coop
