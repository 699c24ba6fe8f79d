#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace trilbm {

using Vec2 = Eigen::Vector2d;
using VecX = Eigen::VectorXd;
using VecXi = Eigen::VectorXi;
using MatX = Eigen::MatrixXd;
using Mat2X = Eigen::Matrix2Xd;
using MatXi = Eigen::MatrixXi;
using CVecX = Eigen::VectorXcd;
using CMatX = Eigen::MatrixXcd;
using Cplx = std::complex<double>;
using NodeId = std::int32_t;

// Errors are split by how the CLI reports them: bad input / configuration
// exits with 2, numerical failures (divergence, lost eigenvalue branch,
// singular matrix) with 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : ConfigError {
  using ConfigError::ConfigError;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : NumericalError {
  DivergenceError(long step_, NodeId node_)
      : NumericalError("non-finite value at step " + std::to_string(step_) +
                       ", node " + std::to_string(node_)),
        step(step_),
        node(node_) {}
  long step;
  NodeId node;
};

}  // namespace trilbm
