// Copyright 2026 The GNN Transfer Lab Authors.
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

namespace gtl {

// Error taxonomy. The CLI maps each family to an exit code:
//   InputError (and subclasses)  -> 1
//   NumericError (and subclasses) -> 2
//   StatsError                    -> 3

/// Bad arguments, bad configuration, out-of-range indices.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file on disk. The message carries the file and line or byte
/// offset where parsing stopped.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class UnsupportedVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Transfer protocol cannot be applied (e.g. output dims differ for the
/// old-layer protocol).
class ProtocolError : public InputError {
 public:
  using InputError::InputError;
};

/// Non-finite values, diverging computations.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric whose formula has a zero denominator on the given input
/// (modularity of an edgeless graph, inertia with zero total scatter,
/// ROC-AUC with a single class present).
class UndefinedMetricError : public NumericError {
 public:
  using NumericError::NumericError;
};

class CalibrationError : public NumericError {
 public:
  CalibrationError(const std::string& what, double closest)
      : NumericError(what), closest_(closest) {}
  double closest() const { return closest_; }

 private:
  double closest_;
};

/// Significance test on degenerate samples (fewer than two values or zero
/// variance in both samples).
class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gtl
