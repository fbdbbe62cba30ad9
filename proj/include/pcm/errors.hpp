// Copyright 2026 The PCM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PCM_ERRORS_HPP_
#define PCM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pcm {

// Violated precondition, malformed input, or unparsable file. Maps to
// process exit code 2 in the command-line driver.
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: iteration caps exceeded, factorization failure,
// undefined metric. Maps to process exit code 3 in the command-line driver.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Optimizer failed to reach the requested gradient tolerance.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double final_grad_norm)
      : NumericalError(what), final_grad_norm_(final_grad_norm) {}
  double final_grad_norm() const { return final_grad_norm_; }

 private:
  double final_grad_norm_;
};

}  // namespace pcm

#endif  // PCM_ERRORS_HPP_
