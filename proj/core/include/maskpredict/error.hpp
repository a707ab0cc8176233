// Copyright 2026 The MaskPredict Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maskpredict {

enum class ErrorKind {
  kInvalidArgument,
  kIllConditioned,
  kNumericalFailure,
  kKeyGeneration,
  kShareDerivation,
  kProtocolOrder,
  kProtocol,
  kDecode,
  kIo,
};

const char* to_string(ErrorKind kind);

// Root of every exception thrown by the library. Callers that only need the
// category switch on kind(); the subclasses exist so tests and the CLI can
// catch precisely.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

// Singular or too badly conditioned to invert; callers resample.
class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& what, double condition_estimate)
      : Error(ErrorKind::kIllConditioned, what),
        condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what)
      : Error(ErrorKind::kNumericalFailure, what) {}
};

class KeyGenerationFailure : public Error {
 public:
  explicit KeyGenerationFailure(const std::string& what)
      : Error(ErrorKind::kKeyGeneration, what) {}
};

class ShareDerivationFailure : public Error {
 public:
  explicit ShareDerivationFailure(const std::string& what)
      : Error(ErrorKind::kShareDerivation, what) {}
};

class ProtocolOrderViolation : public Error {
 public:
  explicit ProtocolOrderViolation(const std::string& what)
      : Error(ErrorKind::kProtocolOrder, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what)
      : Error(ErrorKind::kProtocol, what) {}
};

class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(ErrorKind::kDecode,
              what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace maskpredict
