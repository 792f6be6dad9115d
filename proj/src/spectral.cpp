#include "rydcft/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "rydcft/errors.hpp"
#include "rydcft/io.hpp"
#include "rydcft/rng.hpp"

namespace rydcft {

std::vector<double> Spectrum::gaps() const {
  std::vector<double> g(energies.size());
  for (std::size_t k = 0; k < energies.size(); ++k) g[k] = energies[k] - energies.front();
  return g;
}

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0) v = -v;
}

Spectrum dense_solve(const SparseOperator& H, std::size_t k, bool keep) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.to_dense(),
                                                    keep ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
  Spectrum s;
  s.method = "dense";
  s.energies.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
  if (keep) s.vectors = es.eigenvectors().leftCols(static_cast<Eigen::Index>(k));
  return s;
}

Eigen::VectorXd random_unit(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(i) - 0.5;
  return v.normalized();
}

// Thick-restart Lanczos with full (twice-applied) Gram-Schmidt reorthogonalization.
// The projected matrix is accumulated explicitly as V^T H V, so the arrowhead structure
// left by a restart needs no special handling.
Spectrum lanczos_solve(const SparseOperator& H, std::size_t k, const EigenOptions& opt) {
  const std::size_t n = H.dim();
  std::size_t m = opt.subspace > 0 ? static_cast<std::size_t>(opt.subspace)
                                   : std::max<std::size_t>(2 * k + 20, k + 30);
  m = std::min(m, n - 1);
  if (m <= k + 1) throw ConvergenceError("Lanczos subspace too small for requested states");
  const auto M = static_cast<Eigen::Index>(m);

  Eigen::MatrixXd V(static_cast<Eigen::Index>(n), M + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(M + 1, M + 1);
  if (opt.start && opt.start->size() == static_cast<Eigen::Index>(n) && opt.start->norm() > 0) {
    // Mix in a little noise so states orthogonal to the warm start are still reachable.
    V.col(0) = opt.start->normalized() + 1e-3 * random_unit(n, opt.seed, 0);
    V.col(0).normalize();
  } else {
    V.col(0) = random_unit(n, opt.seed, 0);
  }

  Eigen::Index kept = 0;
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  Eigen::VectorXd theta;
  Eigen::MatrixXd Y;
  int restart = 0;
  std::uint64_t stream = 1;
  for (;; ++restart) {
    for (Eigen::Index j = kept; j < M; ++j) {
      H.apply(Eigen::VectorXd(V.col(j)), w);
      const auto Vj = V.leftCols(j + 1);
      Eigen::VectorXd h = Vj.transpose() * w;
      w.noalias() -= Vj * h;
      const Eigen::VectorXd h2 = Vj.transpose() * w;
      w.noalias() -= Vj * h2;
      h += h2;
      T.col(j).head(j + 1) = h;
      T.row(j).head(j + 1) = h.transpose();
      double beta = w.norm();
      if (beta < 1e-13 * std::max(1.0, std::abs(h[j]))) {
        // Invariant subspace: continue with a fresh direction decoupled from T.
        beta = 0.0;
        w = random_unit(n, opt.seed, stream++);
        for (int pass = 0; pass < 2; ++pass) w -= Vj * (Vj.transpose() * w);
        V.col(j + 1) = w.normalized();
      } else {
        V.col(j + 1) = w / beta;
      }
      T(j + 1, j) = T(j, j + 1) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(M, M));
    theta = es.eigenvalues();
    Y = es.eigenvectors();
    const double beta_m = T(M, M - 1);
    bool done = true;
    for (std::size_t i = 0; i < k; ++i) {
      const double res = std::abs(beta_m * Y(M - 1, static_cast<Eigen::Index>(i)));
      if (res > opt.tol * std::max(std::abs(theta[i]), 1.0)) {
        done = false;
        break;
      }
    }
    if (done) break;
    if (restart >= opt.max_restarts)
      throw ConvergenceError("Lanczos did not converge after " + std::to_string(opt.max_restarts) +
                             " restarts");
    kept = static_cast<Eigen::Index>(std::min(m - 2, k + (m - k) / 2));
    const Eigen::MatrixXd ritz = V.leftCols(M) * Y.leftCols(kept);
    V.leftCols(kept) = ritz;
    V.col(kept) = V.col(M);
    T.setZero();
    for (Eigen::Index i = 0; i < kept; ++i) T(i, i) = theta[i];
  }

  Spectrum s;
  s.method = "lanczos";
  s.iterations = restart + 1;
  s.energies.assign(theta.data(), theta.data() + k);
  const auto K = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd X = V.leftCols(M) * Y.leftCols(K);
  for (Eigen::Index i = 0; i < K; ++i) X.col(i).normalize();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < K; ++i) {
    const Eigen::VectorXd r = H * Eigen::VectorXd(X.col(i)) - theta[i] * X.col(i);
    worst = std::max(worst, r.norm() / std::max(std::abs(theta[i]), 1.0));
  }
  s.max_relative_residual = worst;
  if (opt.keep_vectors) s.vectors = std::move(X);
  return s;
}

}  // namespace

Spectrum eigensolve_lowest(const SparseOperator& H, std::size_t n_states, const EigenOptions& opt) {
  const std::size_t n = H.dim();
  if (n_states == 0 || n_states > n)
    throw ValidationError("n_states=" + std::to_string(n_states) + " outside 1..dimension " +
                          std::to_string(n));
  const bool dense = n <= opt.always_dense_below ||
                     (n <= opt.dense_threshold && 4 * n_states >= n) ||
                     n_states + 2 >= n;
  const bool need_vectors = opt.keep_vectors || opt.reflection != nullptr;
  Spectrum s = dense ? dense_solve(H, n_states, need_vectors) : lanczos_solve(H, n_states, [&] {
    EigenOptions o = opt;
    o.keep_vectors = need_vectors;
    return o;
  }());
  if (s.vectors.cols() > 0)
    for (Eigen::Index i = 0; i < s.vectors.cols(); ++i) fix_sign(s.vectors.col(i));
  if (opt.reflection) parity_label(s, *opt.reflection, opt.degeneracy_tol);
  if (!opt.keep_vectors) s.vectors.resize(0, 0);
  return s;
}

std::vector<int> parity_label(Spectrum& spec, const Permutation& R, double degeneracy_tol) {
  if (!spec.has_vectors()) throw ValidationError("parity_label requires stored eigenvectors");
  const std::size_t n = spec.size();
  spec.parities.assign(n, kParityAmbiguous);
  spec.reflection_value.assign(n, 0.0);
  for (std::size_t a = 0; a < n;) {
    std::size_t b = a + 1;
    while (b < n && spec.energies[b] - spec.energies[b - 1] < degeneracy_tol) ++b;
    const auto c = static_cast<Eigen::Index>(b - a);
    auto block = spec.vectors.middleCols(static_cast<Eigen::Index>(a), c);
    Eigen::MatrixXd RX(block.rows(), c);
    for (Eigen::Index j = 0; j < c; ++j) RX.col(j) = permute(R, block.col(j));
    if (c > 1) {
      Eigen::MatrixXd C = block.transpose() * RX;
      C = 0.5 * (C + C.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
      const Eigen::MatrixXd rot = block * es.eigenvectors();
      block = rot;
      for (Eigen::Index j = 0; j < c; ++j) {
        fix_sign(block.col(j));
        RX.col(j) = permute(R, block.col(j));
      }
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      const double r = block.col(j).dot(RX.col(j));
      spec.reflection_value[a + j] = r;
      if (std::abs(r) > 0.99) spec.parities[a + j] = r > 0 ? kParityEven : kParityOdd;
    }
    a = b;
  }
  return spec.parities;
}

Eigen::MatrixXd matrix_elements(const Spectrum& spec, const SparseOperator& K) {
  if (!spec.has_vectors()) throw ValidationError("matrix elements require stored eigenvectors");
  Eigen::MatrixXd KX(spec.vectors.rows(), spec.vectors.cols());
  for (Eigen::Index j = 0; j < spec.vectors.cols(); ++j) KX.col(j) = K * Eigen::VectorXd(spec.vectors.col(j));
  return spec.vectors.transpose() * KX;
}

TransitionTable transition_strengths(const Spectrum& spec, const SparseOperator& K, std::size_t ground) {
  if (!spec.has_vectors()) throw ValidationError("transition strengths require stored eigenvectors");
  if (ground >= spec.size()) throw ValidationError("ground index out of range");
  const Eigen::VectorXd g = spec.vector(ground);
  const Eigen::VectorXd Kg = K * g;
  TransitionTable t;
  t.ground = ground;
  t.k_squared = Kg.squaredNorm();
  const Eigen::VectorXd amps = spec.vectors.transpose() * Kg;
  for (std::size_t e = 0; e < spec.size(); ++e) {
    const double s = amps[static_cast<Eigen::Index>(e)] * amps[static_cast<Eigen::Index>(e)];
    if (e == ground) {
      t.diagonal = s;
      continue;
    }
    t.entries.push_back({e, spec.energies[e] - spec.energies[ground], s});
  }
  return t;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec, const TransitionTable* table) {
  std::vector<double> strength(spec.size(), 0.0);
  if (table) {
    strength[table->ground] = table->diagonal;
    for (const auto& e : table->entries) strength[e.index] = e.strength;
  }
  os << "index,energy,gap,parity,strength\n";
  for (std::size_t k = 0; k < spec.size(); ++k) {
    os << k << ',' << fmt_num(spec.energies[k]) << ',' << fmt_num(spec.energies[k] - spec.energies[0]) << ','
       << (spec.parities.empty() ? 0 : spec.parities[k]) << ',' << fmt_num(strength[k]) << '\n';
  }
}

}  // namespace rydcft
