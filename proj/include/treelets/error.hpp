// Copyright 2026 The Treelets Authors
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

namespace treelets {

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, non-finite cells, out-of-range
/// parameters. The CLI maps this to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (e.g. asked for the similarity
/// of a retired variable).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Pair search on a state with fewer than two active variables.
class ExhaustedTreeError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// An internal invariant failed. The CLI maps this to exit code 2.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A rotation record does not diagonalize the block it is applied to.
class InconsistentRotationError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

}  // namespace treelets
