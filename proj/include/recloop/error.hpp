/* Copyright 2026 The recloop Authors.

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

namespace recloop {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a precondition (bad arguments, invalid config).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Model output or input text could not be decoded.
class ParseError : public Error {
 public:
  using Error::Error;
};

// File could not be read, written or decoded.
class IoError : public Error {
 public:
  using Error::Error;
};

// Transport failure talking to a model backend.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, int attempts = 0)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

// A replay backend was asked for a request it has no record of.
class ReplayError : public BackendError {
 public:
  ReplayError(const std::string& what, std::string digest)
      : BackendError(what), digest_(std::move(digest)) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

// Dataset or report document violates its schema.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Synthetic oracle asked about a sample it does not know.
class OracleError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace recloop
