#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pvs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Invalid argument to an operator or solver (bad shape, nonpositive weight, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Smoothing index outside the range where the proximity operator is single-valued.
class IndexError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// Backtracking exhausted its trial budget without satisfying the sufficient-decrease test.
class StepsizeError : public std::runtime_error {
 public:
  StepsizeError(const std::string& what, double last_gamma, int trials)
      : std::runtime_error(what), last_gamma_(last_gamma), trials_(trials) {}

  double last_gamma() const noexcept { return last_gamma_; }
  int trials() const noexcept { return trials_; }

 private:
  double last_gamma_;
  int trials_;
};

/// The iteration produced a non-finite cost.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear system could not be solved (singular or indefinite).
class LinAlgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pvs
