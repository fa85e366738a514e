#pragma once

#include <Eigen/Dense>

namespace covpath {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Arbitrary square matrix: steering matrices A, Q, transition matrices T.
using GeneralMatrix = Matrix;

/// Execution policy for the data-parallel kernels. `serial` is the reference.
enum class Exec { serial, parallel };

}  // namespace covpath
