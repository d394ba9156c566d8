// Copyright 2026 The Sangria Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SANGRIA_ERROR_HPP_
#define SANGRIA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sangria {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (CSV layout, ragged rows, ...).
class IngestError : public Error {
 public:
  explicit IngestError(const std::string& msg) : Error("ingest: " + msg) {}
};

// Vector/matrix dimension mismatches.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error("shape: " + msg) {}
};

// Divergence or other failures while fitting a model.
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& msg) : Error("training: " + msg) {}
};

// Artifact encoding/decoding failures, including version mismatches.
class SerializationError : public Error {
 public:
  explicit SerializationError(const std::string& msg)
      : Error("serialization: " + msg) {}
};

}  // namespace sangria

#endif  // SANGRIA_ERROR_HPP_
