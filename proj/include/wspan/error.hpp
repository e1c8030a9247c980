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

#pragma once

#include <stdexcept>
#include <string>

namespace wspan {

enum class Errc {
  OutOfRange,
  IgnoreSentinel,
  FormatError,
  IoError,
  BadMagic,
  TruncatedFile,
  NonFiniteValue,
  UnknownClass,
  InvalidArgument,
  ExtentMismatch,
  DegenerateBox,
  EmptyProposalSet,
  ZeroHeatmap,
  NoDetections,
  MissingGroundTruth,
  EmptySupport,
  TooLarge,
  MissingPair,
};

const char* errc_name(Errc code) noexcept;

/// All library failures are reported through this exception; `code()` names
/// the failure class so callers (and the CLI exit-code mapping) can branch.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace wspan
