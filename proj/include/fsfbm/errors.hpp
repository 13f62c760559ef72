#pragma once

#include <stdexcept>
#include <string>

namespace fsfbm {

// Adaptive integration ran out of budget; carries the best estimate and the
// error bound it reached.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what), estimate(estimate), error_bound(error_bound) {}
  double estimate;
  double error_bound;
};

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StiffnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::size_t step_index)
      : std::runtime_error(what), step_index(step_index) {}
  std::size_t step_index;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnstableMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsfbm
