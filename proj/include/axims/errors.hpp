// Copyright 2026 The AXIMS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace axims {

// Base of every error the library throws. The CLI maps `is_input_error()`
// to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool is_input_error() const noexcept { return false; }
};

class InputError : public Error {
 public:
  using Error::Error;
  bool is_input_error() const noexcept override { return true; }
};

class ConfigError : public InputError { using InputError::InputError; };
class SchemaError : public InputError { using InputError::InputError; };
class FormatError : public InputError { using InputError::InputError; };

class IoError : public Error { using Error::Error; };
class SimHorizonExceeded : public Error { using Error::Error; };
class InsufficientData : public Error { using Error::Error; };
class DegenerateData : public Error { using Error::Error; };
class DegenerateTestSet : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class DimensionError : public Error { using Error::Error; };

}  // namespace axims
