#pragma once

#include <Eigen/Dense>

namespace vahrs {

// Companion form of s^n + alpha_n s^(n-1) + ... + alpha_1: ones on the
// superdiagonal, -(alpha_1 ... alpha_n) in the last row.
struct CompanionSystem {
  int n = 0;
  Eigen::VectorXd alphas;             // alpha_1 .. alpha_n
  Eigen::MatrixXd A_alpha;            // n x n
  Eigen::MatrixXd M_alpha;            // kron(A_alpha, I3), 3n x 3n
  Eigen::VectorXcd eigenvalues;       // of A_alpha
  double re_alpha = 0.0;              // min |Re eig|
};

// Throws std::invalid_argument when the polynomial is not Hurwitz.
CompanionSystem companion(const Eigen::VectorXd& alphas);

// P solving M_alpha^T P + P M_alpha = -I (3n x 3n), via the vectorized
// Kronecker linear system. Guarantees symmetry, positive definiteness and
// residual norm <= 1e-8 or throws std::runtime_error.
Eigen::MatrixXd solve_lyapunov(const CompanionSystem& sys);

}  // namespace vahrs
