#include "vahrs/companion.hpp"

#include <stdexcept>

namespace vahrs {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return out;
}

}  // namespace

CompanionSystem companion(const Eigen::VectorXd& alphas) {
  const int n = static_cast<int>(alphas.size());
  if (n < 1) throw std::invalid_argument("companion: empty gain vector");
  CompanionSystem sys;
  sys.n = n;
  sys.alphas = alphas;
  sys.A_alpha = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) sys.A_alpha(i, i + 1) = 1.0;
  for (int j = 0; j < n; ++j) sys.A_alpha(n - 1, j) = -alphas(j);

  const Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A_alpha);
  sys.eigenvalues = es.eigenvalues();
  double max_re = -1e300;
  double min_abs_re = 1e300;
  for (int i = 0; i < n; ++i) {
    max_re = std::max(max_re, sys.eigenvalues(i).real());
    min_abs_re = std::min(min_abs_re, std::abs(sys.eigenvalues(i).real()));
  }
  if (max_re >= -1e-12) {
    throw std::invalid_argument("companion: gains are not Hurwitz");
  }
  sys.re_alpha = min_abs_re;
  sys.M_alpha = kron(sys.A_alpha, Eigen::MatrixXd::Identity(3, 3));
  return sys;
}

Eigen::MatrixXd solve_lyapunov(const CompanionSystem& sys) {
  const Eigen::MatrixXd& M = sys.M_alpha;
  const int d = static_cast<int>(M.rows());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  // vec(M^T P + P M) = (I (x) M^T + M^T (x) I) vec(P)
  const Eigen::MatrixXd lhs = kron(I, M.transpose()) + kron(M.transpose(), I);
  Eigen::VectorXd rhs(d * d);
  const Eigen::MatrixXd negI = -I;
  for (int j = 0; j < d; ++j) rhs.segment(j * d, d) = negI.col(j);
  const Eigen::VectorXd vecP = lhs.partialPivLu().solve(rhs);
  Eigen::MatrixXd P(d, d);
  for (int j = 0; j < d; ++j) P.col(j) = vecP.segment(j * d, d);
  P = 0.5 * (P + P.transpose()).eval();

  const double residual = (M.transpose() * P + P * M + I).norm();
  if (residual > 1e-8) {
    throw std::runtime_error("solve_lyapunov: residual above 1e-8");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::runtime_error("solve_lyapunov: P not positive definite");
  }
  return P;
}

}  // namespace vahrs
