#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "stochak/fields.hpp"

namespace stochak {

// Ordered eigensystem of k -> k'' + A k on the periodic grid.
// lambdas are descending, lambda_0 is simple, e_0 is strictly positive,
// eigenfields are L2(S^1)-orthonormal.
struct EigenSystem {
  std::vector<double> lambdas;
  std::vector<SpatialField> modes;
  GridPtr grid;

  int size() const { return static_cast<int>(lambdas.size()); }
  double lambda0() const { return lambdas[0]; }
  const SpatialField& e0() const { return modes[0]; }
};

// Dense symmetric discretization: periodic second differences plus diag(A).
Eigen::MatrixXd build_operator_matrix(const SpatialField& A);

// Top-M eigenpairs by descending eigenvalue, L2-normalized so that
// quadrature(e_n^2) = 1. Fails hard if lambda_0 is (nearly) degenerate or
// the principal eigenfunction changes sign.
EigenSystem eigendecompose(const Eigen::MatrixXd& op, GridPtr grid, int n_modes);

EigenSystem build_eigensystem(const SpatialField& A, int n_modes);

// Coefficients <K, e_n> for n < size().
std::vector<double> project(const SpatialField& K, const EigenSystem& es);

// sum_n coeff_n * e_n
SpatialField reconstruct(std::span<const double> coeffs, const EigenSystem& es);

}  // namespace stochak
