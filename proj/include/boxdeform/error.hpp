// Copyright 2026 The boxdeform Authors
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
#include <utility>

namespace boxdeform {

enum class ErrorCode {
  kInvalidArgument = 1,
  kIo,
  kParse,
  kTopology,
  kScorer,
  kStage,
  kInternal,
};

// Base of every exception thrown by the library. The C API maps the code
// one-to-one onto bd_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::kParse,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TopologyError : public Error {
 public:
  explicit TopologyError(const std::string& what)
      : Error(ErrorCode::kTopology, what) {}
};

class ScorerError : public Error {
 public:
  explicit ScorerError(const std::string& what)
      : Error(ErrorCode::kScorer, what) {}
};

// Raised by the pipeline driver; `stage` names the step that failed
// (config, load, voxelize, split, graph, optimize, metrics, write). The
// code is that of the underlying failure when there is one.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what,
             ErrorCode cause = ErrorCode::kStage)
      : Error(cause, "[" + stage + "] " + what),
        stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace boxdeform
