// Copyright 2026 The MIDA Authors. All Rights Reserved.
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

#ifndef MIDA_ERRORS_HPP_
#define MIDA_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mida {

// Root of every error thrown by the library. The CLI maps all of these to
// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not conform to the vocabulary width or to each other.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A bag (or score vector) with no instances.
class EmptyBagError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or runaway iterates inside the solver.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or generator configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Semantic problems with loaded data (unlabeled users, duplicates, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed model file: truncated, wrong version, bad checksum.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A metric that is not defined for the given labels (e.g. AUC with a single
// class present).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Cell-level CSV problem. Rows are 1-based data rows (the header is not
// counted).
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t row, std::string column,
             const std::string& what)
      : Error(file + ": row " + std::to_string(row) + ", column \"" + column +
              "\": " + what),
        file_(std::move(file)),
        row_(row),
        column_(std::move(column)) {}

  const std::string& file() const { return file_; }
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::string file_;
  std::size_t row_;
  std::string column_;
};

}  // namespace mida

#endif  // MIDA_ERRORS_HPP_
