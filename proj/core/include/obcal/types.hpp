#pragma once

#include <Eigen/Core>

namespace obcal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

}  // namespace obcal
