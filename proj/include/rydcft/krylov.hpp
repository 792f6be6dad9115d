#pragma once

#include <Eigen/Dense>
#include <functional>

namespace rydcft {

using ComplexApply = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

struct KrylovStep {
  int dimension = 0;
  double error = 0.0;  // a posteriori estimate of ||exact - approx||
  bool converged = false;
};

// v <- exp(-i tau A) v for Hermitian A using a Lanczos basis of at most m_max vectors.
// Stops early once the error estimate drops below tol. When it cannot reach tol the
// input vector is left unchanged and converged = false.
KrylovStep krylov_expm_step(const ComplexApply& A, double tau, Eigen::VectorXcd& v, int m_max, double tol);

// Same, splitting tau into substeps as needed. Returns the number of substeps. `hint`
// carries the last successful substep length between calls (0 = start with tau).
int krylov_expm(const ComplexApply& A, double tau, Eigen::VectorXcd& v, int m_max, double tol,
                double* hint = nullptr, long* matvecs = nullptr);

}  // namespace rydcft
