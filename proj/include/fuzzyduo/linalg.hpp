#pragma once

#include <Eigen/Core>

namespace fuzzyduo {

// Row-major so that .data() walks tensors in the serialized order.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

} // namespace fuzzyduo
