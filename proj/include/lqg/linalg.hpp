#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct CholeskyResult {
  Matrix lower;
  double jitter = 0.0;  // diagonal shift actually applied
};

// Cholesky with an escalating diagonal jitter ladder.  The first attempt is
// unmodified; on failure the shift starts at 1e-12 * trace/dim and grows by
// factors of 10 up to 1e-6 * trace/dim.
inline CholeskyResult cholesky_with_jitter(const Matrix& cov) {
  const auto n = cov.rows();
  if (n == 0) throw std::invalid_argument("cholesky_with_jitter: empty matrix");
  const double scale = cov.trace() / static_cast<double>(n);
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
  for (double j = 1e-12 * scale; j <= 1.0000001e-6 * scale; j *= 10.0) {
    Matrix shifted = cov;
    shifted.diagonal().array() += j;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), j};
  }
  throw std::runtime_error(
      "cholesky_with_jitter: factorization failed at max jitter (dim=" +
      std::to_string(n) + ", trace/dim=" + std::to_string(scale) + ")");
}

}  // namespace lqg
