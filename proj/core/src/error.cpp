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

#include "coop/error.hpp"

namespace coop {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidEncoding: return "InvalidEncoding";
        case ErrorCode::EmptyDocument: return "EmptyDocument";
        case ErrorCode::DuplicateReportId: return "DuplicateReportId";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::TemplateInvalid: return "TemplateInvalid";
        case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
        case ErrorCode::EmptyFinalAnswer: return "EmptyFinalAnswer";
        case ErrorCode::EndpointUnavailable: return "EndpointUnavailable";
        case ErrorCode::OutputTruncated: return "OutputTruncated";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::RequestRejected: return "RequestRejected";
        case ErrorCode::UnterminatedThinking: return "UnterminatedThinking";
        case ErrorCode::ExtractionUnparseable: return "ExtractionUnparseable";
        case ErrorCode::CategoryUnknown: return "CategoryUnknown";
        case ErrorCode::MixedCaseInput: return "MixedCaseInput";
        case ErrorCode::IncompleteRun: return "IncompleteRun";
        case ErrorCode::StratumExhausted: return "StratumExhausted";
        case ErrorCode::NotInSample: return "NotInSample";
        case ErrorCode::DuplicateAnnotation: return "DuplicateAnnotation";
        case ErrorCode::PassageNotInReport: return "PassageNotInReport";
        case ErrorCode::UnknownReviewer: return "UnknownReviewer";
        case ErrorCode::Forbidden: return "Forbidden";
        case ErrorCode::IncompleteAnnotations: return "IncompleteAnnotations";
        case ErrorCode::UnresolvedRemaining: return "UnresolvedRemaining";
        case ErrorCode::UnknownItem: return "UnknownItem";
        case ErrorCode::NoteRequired: return "NoteRequired";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::RunLocked: return "RunLocked";
        case ErrorCode::FailureThresholdExceeded: return "FailureThresholdExceeded";
        case ErrorCode::Interrupted: return "Interrupted";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace coop
