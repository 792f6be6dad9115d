#include "rydcft/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "rydcft/errors.hpp"

namespace rydcft {

namespace {

// exp(-i tau T) e1 for a real symmetric tridiagonal T given as diagonal a, offdiagonal b.
Eigen::VectorXcd small_expm_e1(const std::vector<double>& a, const std::vector<double>& b, double tau) {
  const auto m = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    T(i, i) = a[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = b[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Eigen::MatrixXd& U = es.eigenvectors();
  Eigen::VectorXcd c(m);
  Eigen::VectorXcd phase(m);
  for (Eigen::Index i = 0; i < m; ++i) phase[i] = std::polar(1.0, -tau * lam[i]) * U(0, i);
  c = U.cast<std::complex<double>>() * phase;
  return c;
}

}  // namespace

KrylovStep krylov_expm_step(const ComplexApply& A, double tau, Eigen::VectorXcd& v, int m_max, double tol) {
  KrylovStep st;
  const double beta0 = v.norm();
  if (beta0 == 0.0 || tau == 0.0) {
    st.converged = true;
    return st;
  }
  const Eigen::Index n = v.size();
  Eigen::MatrixXcd Q(n, m_max + 1);
  Q.col(0) = v / beta0;
  std::vector<double> a, b;
  Eigen::VectorXcd w(n);
  Eigen::VectorXcd c;
  for (int j = 0; j < m_max; ++j) {
    A(Q.col(j), w);
    const double alpha = Q.col(j).dot(w).real();
    w -= alpha * Q.col(j);
    if (j > 0) w -= b.back() * Q.col(j - 1);
    // One extra pass of full reorthogonalization keeps the short recurrence honest.
    const auto Qj = Q.leftCols(j + 1);
    w.noalias() -= Qj * (Qj.adjoint() * w);
    a.push_back(alpha);
    const double beta = w.norm();
    c = small_expm_e1(a, b, tau);
    st.dimension = j + 1;
    if (beta < 1e-14 * std::max(1.0, std::abs(alpha))) {
      st.error = 0.0;  // invariant subspace: exact
      st.converged = true;
      break;
    }
    st.error = beta0 * beta * std::abs(c[j]);
    if (st.error <= tol) {
      st.converged = true;
      break;
    }
    b.push_back(beta);
    Q.col(j + 1) = w / beta;
  }
  if (!st.converged) return st;
  v = beta0 * (Q.leftCols(st.dimension) * c);
  return st;
}

int krylov_expm(const ComplexApply& A, double tau, Eigen::VectorXcd& v, int m_max, double tol, double* hint,
                long* matvecs) {
  const double sign = tau < 0 ? -1.0 : 1.0;
  double remaining = std::abs(tau);
  double sub = (hint && *hint > 0) ? std::min(*hint, remaining) : remaining;
  int steps = 0;
  while (remaining > 0.0) {
    const double h = std::min(sub, remaining);
    Eigen::VectorXcd trial = v;
    const KrylovStep st = krylov_expm_step(A, sign * h, trial, m_max, tol);
    if (matvecs) *matvecs += st.dimension;
    if (!st.converged) {
      sub = 0.5 * h;
      if (sub < 1e-14 * std::abs(tau) + 1e-300) throw NumericalError("Krylov substep underflow");
      continue;
    }
    v = std::move(trial);
    remaining -= h;
    ++steps;
    // Grow the substep when the basis converged with room to spare.
    if (st.dimension < m_max * 3 / 4) sub = 1.5 * h;
    if (hint) *hint = h;
  }
  return steps;
}

}  // namespace rydcft
