#include "stochak/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace stochak {

Eigen::MatrixXd build_operator_matrix(const SpatialField& A) {
  const int n = A.size();
  const double h = A.grid()->spacing();
  const double w = 1.0 / (h * h);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1) % n;
    const int im = (i + n - 1) % n;
    m(i, i) = -2.0 * w + A[i];
    m(i, ip) += w;
    m(i, im) += w;
  }
  return m;
}

EigenSystem eigendecompose(const Eigen::MatrixXd& op, GridPtr grid, int n_modes) {
  const int n = static_cast<int>(op.rows());
  if (op.cols() != n) throw std::invalid_argument("eigendecompose: matrix not square");
  if (n != grid->n()) throw std::invalid_argument("eigendecompose: matrix/grid size mismatch");
  if (n_modes < 1 || n_modes > n)
    throw std::invalid_argument("eigendecompose: mode count out of range");
  if ((op - op.transpose()).cwiseAbs().maxCoeff() > 1e-12 * op.cwiseAbs().maxCoeff())
    throw std::invalid_argument("eigendecompose: matrix not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: solver failed");

  // Eigen returns ascending order; we want descending.
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();

  if (vals(n - 1) - vals(n - 2) < 1e-8)
    throw std::runtime_error("eigendecompose: principal eigenvalue nearly degenerate");

  EigenSystem es;
  es.grid = grid;
  es.lambdas.reserve(static_cast<size_t>(n_modes));
  es.modes.reserve(static_cast<size_t>(n_modes));
  const double scale = 1.0 / std::sqrt(grid->spacing());
  for (int k = 0; k < n_modes; ++k) {
    const int col = n - 1 - k;
    es.lambdas.push_back(vals(col));
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = vecs(i, col) * scale;
    SpatialField e(grid, std::move(v));
    // Deterministic sign: mean >= 0 when the mode has one, else first
    // nonzero sample positive.
    double q = quadrature(e);
    if (std::abs(q) > 1e-8) {
      if (q < 0.0) e = -1.0 * e;
    } else {
      for (int i = 0; i < n; ++i) {
        if (std::abs(e[i]) > 1e-12) {
          if (e[i] < 0.0) e = -1.0 * e;
          break;
        }
      }
    }
    es.modes.push_back(std::move(e));
  }

  if (!es.modes[0].strictly_positive(0.0))
    throw std::runtime_error(
        "eigendecompose: principal eigenfunction changes sign (grid too coarse?)");
  return es;
}

EigenSystem build_eigensystem(const SpatialField& A, int n_modes) {
  return eigendecompose(build_operator_matrix(A), A.grid(), n_modes);
}

std::vector<double> project(const SpatialField& K, const EigenSystem& es) {
  require_same_grid(K, es.modes[0]);
  std::vector<double> c(static_cast<size_t>(es.size()));
  for (int k = 0; k < es.size(); ++k) c[static_cast<size_t>(k)] = inner_product(K, es.modes[static_cast<size_t>(k)]);
  return c;
}

SpatialField reconstruct(std::span<const double> coeffs, const EigenSystem& es) {
  if (static_cast<int>(coeffs.size()) != es.size())
    throw std::invalid_argument("reconstruct: coefficient count != mode count");
  std::vector<double> out(static_cast<size_t>(es.grid->n()), 0.0);
  for (int k = 0; k < es.size(); ++k) {
    const auto& e = es.modes[static_cast<size_t>(k)];
    for (int i = 0; i < e.size(); ++i) out[static_cast<size_t>(i)] += coeffs[static_cast<size_t>(k)] * e[i];
  }
  return SpatialField(es.grid, std::move(out));
}

}  // namespace stochak
