/* Copyright 2026 The wspan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "wspan/error.hpp"

namespace wspan {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::IgnoreSentinel: return "IgnoreSentinel";
    case Errc::FormatError: return "FormatError";
    case Errc::IoError: return "IoError";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ExtentMismatch: return "ExtentMismatch";
    case Errc::DegenerateBox: return "DegenerateBox";
    case Errc::EmptyProposalSet: return "EmptyProposalSet";
    case Errc::ZeroHeatmap: return "ZeroHeatmap";
    case Errc::NoDetections: return "NoDetections";
    case Errc::MissingGroundTruth: return "MissingGroundTruth";
    case Errc::EmptySupport: return "EmptySupport";
    case Errc::TooLarge: return "TooLarge";
    case Errc::MissingPair: return "MissingPair";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

}  // namespace wspan
