#pragma once

#include <Eigen/Dense>
#include <complex>

namespace mirrorqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex IMU{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

} // namespace mirrorqed
