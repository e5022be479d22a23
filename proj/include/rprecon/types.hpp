#pragma once

#include <Eigen/Dense>

namespace rprecon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

} // namespace rprecon
