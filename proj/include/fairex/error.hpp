// Copyright 2026 The fairex authors
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

namespace fairex {

// Base class for all toolkit failures. Subclasses distinguish the failure
// categories that callers (and the CLI exit-code mapping) react to.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text (bad line, bad number, wrong column count).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Value outside its declared numeric range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Duplicate (user, item) pair where at most one is allowed.
class DuplicateError : public Error {
 public:
  using Error::Error;
};

// A mapping file fails to cover every required key.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// A mapping file assigns two different values to the same key.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Operation called outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Iterative training produced a non-finite objective.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Configuration file missing, unreadable, or structurally invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairex
