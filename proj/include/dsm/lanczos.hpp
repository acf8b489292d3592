#pragma once

// Thick-restart Lanczos for the lowest eigenpairs of a real symmetric operator.
//
// The Krylov basis is kept fully orthogonal (two passes of classical
// Gram-Schmidt per step), so the projected matrix is formed directly from the
// Gram-Schmidt coefficients. After a restart it has arrowhead shape; the
// relation  A V_j = V_j T_j + beta_j v_{j+1} e_j^T  holds throughout, so the
// Ritz residual of pair i is |beta_j * y_i(j)|.

#include <dsm/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dsm {

struct LanczosOptions {
  int nev = 1;             // wanted eigenpairs (lowest)
  int max_basis = 0;       // Krylov basis size before restart; 0 = automatic
  double tol = 1e-9;       // residual norm ||A v - theta v||
  int max_restarts = 500;
  std::uint64_t seed = 0x5eed1234abcdULL;
};

struct LanczosResult {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;     // dim x nev, orthonormal columns
  std::vector<double> residuals;
  std::vector<bool> converged;
  int matvecs = 0;
  int restarts = 0;
  int breakdowns = 0;
};

namespace detail {

inline Eigen::VectorXd random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();
  return v;
}

// Orthogonalize w against the first `cols` columns of V, twice. Returns the
// accumulated projection coefficients.
inline Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& v, Eigen::Index cols,
                                     Eigen::VectorXd& w) {
  Eigen::VectorXd h = v.leftCols(cols).transpose() * w;
  w.noalias() -= v.leftCols(cols) * h;
  Eigen::VectorXd h2 = v.leftCols(cols).transpose() * w;
  w.noalias() -= v.leftCols(cols) * h2;
  h += h2;
  return h;
}

}  // namespace detail

/// Lowest `opts.nev` eigenpairs of the symmetric operator `apply` (y = A x) of
/// dimension `dim`. `start` seeds the Krylov space when non-empty.
template <class Apply>
LanczosResult lanczos_lowest(std::size_t dim, Apply&& apply, const LanczosOptions& opts,
                             std::span<const double> start = {}) {
  using Eigen::Index;
  if (dim == 0) throw DimensionMismatch("lanczos: empty operator");
  if (opts.nev < 1 || static_cast<std::size_t>(opts.nev) > dim)
    throw DimensionMismatch("lanczos: nev must be in [1, dim]");
  if (!(opts.tol > 0.0)) throw InvalidParameters("lanczos: tolerance must be positive");
  if (!start.empty() && start.size() != dim)
    throw DimensionMismatch("lanczos: start vector has wrong length");

  const Index n = static_cast<Index>(dim);
  const Index nev = opts.nev;
  Index m = opts.max_basis > 0 ? opts.max_basis : std::max<Index>(2 * nev + 30, 60);
  m = std::min<Index>(std::max<Index>(m, nev + 2), n);

  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXd v(n, m + 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);

  if (start.empty()) {
    v.col(0) = detail::random_unit(dim, rng);
  } else {
    v.col(0) = Eigen::Map<const Eigen::VectorXd>(start.data(), n);
    const double nrm = v.col(0).norm();
    if (!(nrm > 0.0)) throw InvalidParameters("lanczos: start vector is zero");
    v.col(0) /= nrm;
  }

  LanczosResult res;
  Eigen::VectorXd w(n);
  Index kept = 0;
  double anorm = 0.0;

  auto op = [&](Index col, Eigen::VectorXd& out) {
    apply(std::span<const double>(v.col(col).data(), dim), std::span<double>(out.data(), dim));
    ++res.matvecs;
  };

  for (;;) {
    Index filled = m;
    double beta = 0.0;
    for (Index j = kept; j < m; ++j) {
      op(j, w);
      Eigen::VectorXd h = detail::orthogonalize(v, j + 1, w);
      t.block(0, j, j + 1, 1) = h;
      t.block(j, 0, 1, j + 1) = h.transpose();
      anorm = std::max(anorm, std::abs(h[j]));
      beta = w.norm();
      anorm = std::max(anorm, beta);
      if (beta > 1e-13 * std::max(anorm, 1.0)) {
        v.col(j + 1) = w / beta;
        continue;
      }
      // Invariant subspace found.
      if (j + 1 == n) {
        filled = j + 1;
        beta = 0.0;
        break;
      }
      ++res.breakdowns;
      bool ok = false;
      for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
        Eigen::VectorXd r = detail::random_unit(dim, rng);
        detail::orthogonalize(v, j + 1, r);
        const double rn = r.norm();
        if (rn > 1e-8) {
          v.col(j + 1) = r / rn;
          ok = true;
        }
      }
      if (!ok) throw DegenerateBreakdown("lanczos: cannot extend Krylov basis after breakdown");
      beta = 0.0;
      if (j + 1 == m) filled = m;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.topLeftCorner(filled, filled));
    const Eigen::VectorXd& theta = eig.eigenvalues();
    const Eigen::MatrixXd& y = eig.eigenvectors();

    bool all = true;
    for (Index i = 0; i < nev; ++i)
      if (std::abs(beta * y(filled - 1, i)) > opts.tol) all = false;

    if (all || filled == n) {
      res.values.assign(theta.data(), theta.data() + nev);
      res.vectors = v.leftCols(filled) * y.leftCols(nev);
      for (Index i = 0; i < nev; ++i) res.vectors.col(i).normalize();
      // Report true residuals.
      Eigen::VectorXd av(n);
      for (Index i = 0; i < nev; ++i) {
        apply(std::span<const double>(res.vectors.col(i).data(), dim), std::span<double>(av.data(), dim));
        ++res.matvecs;
        const double r = (av - res.values[i] * res.vectors.col(i)).norm();
        res.residuals.push_back(r);
        res.converged.push_back(r <= std::max(opts.tol, 1e3 * 2.2e-16 * anorm));
      }
      return res;
    }

    if (res.restarts >= opts.max_restarts)
      throw NoConvergence("lanczos: no convergence after " + std::to_string(res.restarts) +
                              " restarts (" + std::to_string(res.matvecs) + " matvecs)",
                          res.matvecs);
    ++res.restarts;

    // Keep the lowest Ritz vectors and continue with the residual direction.
    kept = std::min<Index>(filled - 1, nev + (filled - nev) / 2);
    Eigen::MatrixXd ritz = v.leftCols(filled) * y.leftCols(kept);
    v.leftCols(kept) = ritz;
    v.col(kept) = v.col(filled);
    t.setZero();
    for (Index i = 0; i < kept; ++i) t(i, i) = theta[i];
  }
}

}  // namespace dsm
