// Copyright 2026 The mechcat Authors
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

namespace mechcat {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTruncation : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class CapacityError : public Error { using Error::Error; };
class InvalidDissipator : public Error { using Error::Error; };
class InvalidState : public Error { using Error::Error; };
class InvalidParameter : public Error { using Error::Error; };

/// Numerical failures raised by the propagators and solvers.
class NumericalError : public Error { using Error::Error; };
class IntegrationDiverged : public NumericalError {
 public:
  IntegrationDiverged(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};
class NumericalOverflow : public NumericalError {
 public:
  NumericalOverflow(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};
class DegenerateSteadyState : public NumericalError { using NumericalError::NumericalError; };
class QuadratureError : public NumericalError { using NumericalError::NumericalError; };
class AssemblyError : public NumericalError { using NumericalError::NumericalError; };

class DegenerateQubit : public Error { using Error::Error; };
class InsufficientData : public Error { using Error::Error; };
class MatchingImpossible : public Error { using Error::Error; };

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class FilesystemError : public Error { using Error::Error; };

}  // namespace mechcat
