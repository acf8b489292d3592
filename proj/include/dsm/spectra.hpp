#pragma once

#include <dsm/lanczos.hpp>
#include <dsm/model.hpp>

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace dsm {

enum class SolverMethod { Auto, Dense, Krylov };

struct SolverOptions {
  double tol = 1e-9;                  // residual norm per eigenpair
  std::size_t dense_threshold = 2000; // Auto: dense below or at this dimension
  SolverMethod method = SolverMethod::Auto;
  int max_basis = 0;
  int max_restarts = 500;
  std::uint64_t seed = 0x5eed1234abcdULL;
};

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;         // components in `basis`
  std::shared_ptr<const Basis> basis;
  int parity = 1;                     // +1 even, -1 odd
  double parity_weight = 1.0;         // norm fraction in the `parity` sector
  double residual = 0.0;
  bool converged = true;
};

struct SpectrumResult {
  std::vector<Eigenpair> pairs;  // ascending in energy
  BasisSpec basis;
  int n_max_used = 0;

  std::vector<double> eigenvalues() const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.value);
    return out;
  }
  std::vector<int> sector_labels() const {
    std::vector<int> out;
    for (const auto& p : pairs) out.push_back(p.parity);
    return out;
  }
  bool all_converged() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const Eigenpair& p) { return p.converged; });
  }
  double max_residual() const {
    double r = 0.0;
    for (const auto& p : pairs) r = std::max(r, p.residual);
    return r;
  }
};

namespace detail {

inline Eigen::MatrixXd to_dense(const SparseHamiltonian& h) {
  const auto n = static_cast<Eigen::Index>(h.dim());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : h.entries()) {
    a(e.row, e.col) += e.value;
    if (e.row != e.col) a(e.col, e.row) += e.value;
  }
  return a;
}

inline void label_parity(Eigenpair& ep) {
  double even = 0.0, total = 0.0;
  for (std::size_t i = 0; i < ep.vector.size(); ++i) {
    const auto& s = ep.basis->state(i);
    const double w = ep.vector[i] * ep.vector[i];
    total += w;
    if (parity_of(s.n, s.k) == 1) even += w;
  }
  even /= total;
  ep.parity = even >= 0.5 ? 1 : -1;
  ep.parity_weight = std::max(even, 1.0 - even);
}

// Fix the sign so that the largest-magnitude component is positive.
inline void canonical_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  if (!v.empty() && v[arg] < 0.0)
    for (auto& x : v) x = -x;
}

inline std::vector<double> start_vector(const SparseHamiltonian& h, std::uint64_t seed) {
  const auto diag = h.diagonal();
  const auto lowest = static_cast<std::size_t>(
      std::min_element(diag.begin(), diag.end()) - diag.begin());
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(h.dim());
  double nrm = 0.0;
  for (auto& x : v) {
    x = normal(rng);
    nrm += x * x;
  }
  nrm = std::sqrt(nrm);
  for (auto& x : v) x *= 0.05 / nrm;
  v[lowest] += 1.0;
  return v;
}

}  // namespace detail

/// Lowest `k` eigenpairs of `h`. Dense diagonalization below the threshold,
/// thick-restart Lanczos otherwise.
inline SpectrumResult lowest_eigenpairs(const SparseHamiltonian& h, int k, const SolverOptions& opts = {}) {
  if (k < 1 || static_cast<std::size_t>(k) > h.dim())
    throw DimensionMismatch("lowest_eigenpairs: k = " + std::to_string(k) + " outside [1, " +
                            std::to_string(h.dim()) + "]");
  if (!(opts.tol > 0.0)) throw InvalidParameters("lowest_eigenpairs: tol must be positive");

  const bool dense = opts.method == SolverMethod::Dense ||
                     (opts.method == SolverMethod::Auto && h.dim() <= opts.dense_threshold);
  SpectrumResult out;
  out.basis = h.basis().spec();
  out.n_max_used = out.basis.n_max;

  auto push = [&](double value, const double* data, double residual, bool converged) {
    Eigenpair ep;
    ep.value = value;
    ep.vector.assign(data, data + h.dim());
    ep.basis = h.basis_ptr();
    ep.residual = residual;
    ep.converged = converged;
    detail::canonical_sign(ep.vector);
    detail::label_parity(ep);
    out.pairs.push_back(std::move(ep));
  };

  if (dense) {
    const Eigen::MatrixXd a = detail::to_dense(h);
    Eigen::MatrixXd work = a;
    const auto n = static_cast<lapack_int>(h.dim());
    std::vector<double> w(h.dim());
    Eigen::MatrixXd z(a.rows(), k);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, work.data(), n, 0.0, 0.0, 1, k, 0.0,
                                           &found, w.data(), z.data(), n, support.data());
    if (info != 0 || found != k) throw NoConvergence("dense eigensolver failed (info " + std::to_string(info) + ")", 0);
    for (int i = 0; i < k; ++i) {
      const Eigen::VectorXd vec = z.col(i);
      const double r = (a * vec - w[i] * vec).norm();
      push(w[i], vec.data(), r, r <= std::max(opts.tol, 1e-10));
    }
    return out;
  }

  LanczosOptions lo;
  lo.nev = k;
  lo.tol = opts.tol;
  lo.max_basis = opts.max_basis;
  lo.max_restarts = opts.max_restarts;
  lo.seed = opts.seed;
  const auto start = detail::start_vector(h, opts.seed);
  auto res = lanczos_lowest(
      h.dim(), [&h](std::span<const double> x, std::span<double> y) { matvec(h, x, y); }, lo, start);
  for (int i = 0; i < k; ++i)
    push(res.values[i], res.vectors.col(i).data(), res.residuals[i], res.converged[i]);
  return out;
}

inline SpectrumResult lowest_eigenpairs(const SparseHamiltonian& h, int k, double tol) {
  SolverOptions o;
  o.tol = tol;
  return lowest_eigenpairs(h, k, o);
}

/// Lowest `k_per_sector` states of each parity sector, merged and sorted.
inline SpectrumResult solve_sectors(const ModelParams& p, int n_max, int k_per_sector,
                                    const SolverOptions& opts = {},
                                    const AssemblyOptions& assembly = {}) {
  SpectrumResult out;
  out.basis = BasisSpec{p.n_atoms, n_max, Sector::Full};
  out.n_max_used = n_max;
  for (Sector s : {Sector::Even, Sector::Odd}) {
    const auto h = build_hamiltonian(p, BasisSpec{p.n_atoms, n_max, s}, assembly);
    const int k = std::min<int>(k_per_sector, static_cast<int>(h.dim()));
    auto part = lowest_eigenpairs(h, k, opts);
    for (auto& ep : part.pairs) out.pairs.push_back(std::move(ep));
  }
  std::stable_sort(out.pairs.begin(), out.pairs.end(),
                   [](const Eigenpair& a, const Eigenpair& b) { return a.value < b.value; });
  return out;
}

struct Observables {
  double e0 = 0.0;
  double epsilon = 0.0;      // E1 - E0 across both parity sectors
  double nph_total = 0.0;    // <a+a>
  double nph_density = 0.0;  // <a+a> / N
  double delta_x = 0.0;      // sqrt(<x^2> - <x>^2), x = a + a+
  double jz_density = 0.0;   // <Jz> / N
  double mean_x = 0.0;       // <x>, zero in a parity eigenstate
};

/// Ground-state expectation values of `state` (a unit vector in `basis`).
inline Observables state_observables(const Basis& basis, std::span<const double> state, int n_atoms) {
  Observables o;
  double n_avg = 0.0, jz = 0.0, a1 = 0.0, a2 = 0.0;
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const auto [n, k] = basis.state(i);
    const double c = state[i];
    if (c == 0.0) continue;
    n_avg += c * c * n;
    jz += c * c * (k - 0.5 * n_atoms);
    if (const auto j = basis.index_of(n + 1, k); j != Basis::npos)
      a1 += state[static_cast<std::size_t>(j)] * c * std::sqrt(double(n + 1));
    if (const auto j = basis.index_of(n + 2, k); j != Basis::npos)
      a2 += state[static_cast<std::size_t>(j)] * c * std::sqrt(double(n + 1) * double(n + 2));
  }
  // x^2 = a^2 + a+^2 + 2 a+a + 1
  const double x1 = 2.0 * a1;
  const double x2 = 2.0 * a2 + 2.0 * n_avg + 1.0;
  o.nph_total = n_avg;
  o.nph_density = n_avg / n_atoms;
  o.jz_density = jz / n_atoms;
  o.mean_x = x1;
  o.delta_x = std::sqrt(std::max(0.0, x2 - x1 * x1));
  return o;
}

inline Observables observables(const SpectrumResult& spec, const ModelParams& params) {
  bool even = false, odd = false;
  int usable = 0;
  for (const auto& p : spec.pairs) {
    if (!p.converged) continue;
    ++usable;
    (p.parity == 1 ? even : odd) = true;
  }
  if (usable < 2 || !even || !odd)
    throw InsufficientStates("observables need >= 2 converged eigenpairs covering both parity sectors");
  const auto& gs = spec.pairs.front();
  Observables o = state_observables(*gs.basis, gs.vector, params.n_atoms);
  o.e0 = gs.value;
  o.epsilon = spec.pairs[1].value - spec.pairs[0].value;
  return o;
}

/// Ground-state probability in the top 10 % of photon levels.
inline double photon_tail(const Eigenpair& gs) {
  const int n_max = gs.basis->spec().n_max;
  const int levels = n_max + 1;
  const int top = std::max(1, static_cast<int>(std::ceil(0.1 * levels)));
  const int first = levels - top;
  double tail = 0.0;
  for (std::size_t i = 0; i < gs.vector.size(); ++i)
    if (gs.basis->state(i).n >= first) tail += gs.vector[i] * gs.vector[i];
  return tail;
}

struct CutoffPolicy {
  int n_initial = 16;
  double growth = 1.5;
  int n_cap = 1024;
};

struct CutoffStep {
  int n_max;
  double e0;
  double tail;
};

class CutoffRunaway : public Error {
public:
  CutoffRunaway(const std::string& what, std::vector<CutoffStep> trail)
      : Error(what), trail_(std::move(trail)) {}
  const std::vector<CutoffStep>& trail() const noexcept { return trail_; }

private:
  std::vector<CutoffStep> trail_;
};

/// `k` states per parity sector. Grows n_max geometrically until the ground state has negligible weight in
/// the top photon levels and E0 is stable under one further increase. The
/// returned spectrum is the one at the smaller of the last two cutoffs.
inline SpectrumResult converge_cutoff(const ModelParams& params, int k, double tail_tol, double energy_tol,
                                      const CutoffPolicy& policy = {}, const SolverOptions& opts = {},
                                      const AssemblyOptions& assembly = {}) {
  if (!(tail_tol > 0.0) || !(energy_tol > 0.0))
    throw InvalidParameters("converge_cutoff: tolerances must be positive");
  if (policy.n_initial < 1 || !(policy.growth > 1.0))
    throw InvalidParameters("converge_cutoff: need n_initial >= 1 and growth > 1");

  std::vector<CutoffStep> trail;
  SpectrumResult prev;
  bool have_prev = false;
  int n = policy.n_initial;
  auto runaway = [&](const std::string& why) {
    std::string msg = "photon cutoff did not converge (" + why + "); trail:";
    for (const auto& s : trail)
      msg += " [n_max=" + std::to_string(s.n_max) + " E0=" + std::to_string(s.e0) +
             " tail=" + std::to_string(s.tail) + "]";
    return CutoffRunaway(msg, trail);
  };

  for (;;) {
    if (n > policy.n_cap) throw runaway("n_max exceeds cap " + std::to_string(policy.n_cap));
    SpectrumResult cur;
    try {
      cur = solve_sectors(params, n, k, opts, assembly);
    } catch (const DimensionOverflow& e) {
      throw runaway(e.what());
    }
    const double e0 = cur.pairs.front().value;
    const double tail = photon_tail(cur.pairs.front());
    trail.push_back({n, e0, tail});
    if (have_prev) {
      const auto& ps = trail[trail.size() - 2];
      if (ps.tail < tail_tol && std::abs(e0 - ps.e0) < energy_tol) return prev;
    }
    prev = std::move(cur);
    have_prev = true;
    n = std::max(n + 1, static_cast<int>(std::ceil(n * policy.growth)));
  }
}

}  // namespace dsm
