#pragma once

#include <Eigen/Dense>

namespace resalloc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace resalloc
