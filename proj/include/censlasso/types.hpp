#pragma once

#include <Eigen/Dense>
#include <vector>

namespace censlasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

// Sorted, 0-based coordinate indices.
using IndexSet = std::vector<int>;

// Indices j with v[j] != 0 (exact comparison).
IndexSet nonzero_support(const Vector& v);

}  // namespace censlasso
