#include "oracles.hpp"

#include <dsm/spectra.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace dsm;

namespace {

// Reference parameter set: delta 0.5, U 0.5, tau 2.5, kappa 1.2.
ModelParams ref_params(double g, int n_atoms) {
  ModelParams p;
  p.omega = 1.0;
  p.delta = 0.5;
  p.u = 0.5;
  p.tau = 2.5;
  p.kappa = 1.2;
  p.g = g;
  p.n_atoms = n_atoms;
  return p;
}

const double kGc0Ref = std::sqrt(0.375 / 7.45);

SolverOptions forced(SolverMethod m) {
  SolverOptions o;
  o.method = m;
  o.tol = 1e-10;
  return o;
}

}  // namespace

TEST(Lanczos, RandomSparseSymmetricMatchesDense) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const int n = 300;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 0.05 * i + normal(rng);
    for (int d = 1; d <= 3 && i + d < n; ++d) a(i, i + d) = a(i + d, i) = 0.3 * normal(rng);
  }
  const Eigen::VectorXd ref = oracle::dense_eigenvalues(a);
  for (int basis : {0, 12}) {  // 12 forces many thick restarts
    LanczosOptions o;
    o.nev = 4;
    o.tol = 1e-10;
    o.max_basis = basis;
    o.max_restarts = 5000;
    const auto res = lanczos_lowest(
        n,
        [&](std::span<const double> x, std::span<double> y) {
          Eigen::Map<Eigen::VectorXd>(y.data(), n) = a * Eigen::Map<const Eigen::VectorXd>(x.data(), n);
        },
        o);
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(res.values[i], ref[i], 1e-10);
      EXPECT_LE(res.residuals[i], 1e-10);
      EXPECT_NEAR(res.vectors.col(i).norm(), 1.0, 1e-12);
    }
    if (basis == 12) {
      EXPECT_GT(res.restarts, 0);
    }
  }
}

TEST(Lanczos, DegenerateOperatorBreaksDownCleanly) {
  // Three distinct eigenvalues in dimension 50: the Krylov space is invariant
  // after three steps and must be extended with fresh directions.
  const int n = 50;
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = (i % 3) - 1.0;
  LanczosOptions o;
  o.nev = 5;
  o.tol = 1e-10;
  const auto res = lanczos_lowest(
      n,
      [&](std::span<const double> x, std::span<double> y) {
        for (int i = 0; i < n; ++i) y[i] = d[i] * x[i];
      },
      o);
  EXPECT_GT(res.breakdowns, 0);
  for (double v : res.values) EXPECT_NEAR(v, -1.0, 1e-12);
}

TEST(Lanczos, RejectsBadArguments) {
  auto id = [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); };
  LanczosOptions o;
  o.nev = 5;
  EXPECT_THROW(lanczos_lowest(3, id, o), DimensionMismatch);
  o.nev = 1;
  o.tol = 0.0;
  EXPECT_THROW(lanczos_lowest(3, id, o), InvalidParameters);
}

TEST(Spectra, DecoupledGap) {
  ModelParams p = ref_params(0.0, 4);
  p.u = 0.0;
  p.delta = 0.5;
  const auto spec = solve_sectors(p, 4, 2);
  EXPECT_NEAR(spec.pairs[0].value, -2 * p.delta, 1e-12);
  EXPECT_NEAR(spec.pairs[1].value, std::min(-2 * p.delta + p.omega, -p.delta), 1e-12);
  const auto obs = observables(spec, p);
  EXPECT_NEAR(obs.epsilon, std::min(p.omega, p.delta), 1e-12);
}

TEST(Spectra, KrylovMatchesDenseReferencePoint) {
  const ModelParams p = ref_params(0.1, 8);
  for (Sector s : {Sector::Even, Sector::Odd, Sector::Full}) {
    const auto h = build_hamiltonian(p, {8, 40, s});
    const auto kry = lowest_eigenpairs(h, 4, forced(SolverMethod::Krylov));
    const auto den = lowest_eigenpairs(h, 4, forced(SolverMethod::Dense));
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(kry.pairs[i].value, den.pairs[i].value, 1e-10);
      EXPECT_LE(kry.pairs[i].residual, 1e-10);
      EXPECT_TRUE(kry.pairs[i].converged);
    }
  }
}

TEST(Spectra, AutoPathUsesThreshold) {
  const ModelParams p = ref_params(0.3, 8);
  const auto h = build_hamiltonian(p, {8, 40, Sector::Even});
  SolverOptions o;
  o.dense_threshold = 10;  // forces Krylov
  const auto a = lowest_eigenpairs(h, 3, o);
  const auto b = lowest_eigenpairs(h, 3, forced(SolverMethod::Dense));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.pairs[i].value, b.pairs[i].value, 1e-10);
}

TEST(Spectra, EigenvectorsNormalizedAndResidualsSmall) {
  const ModelParams p = ref_params(0.3, 12);
  const auto h = build_hamiltonian(p, {12, 50, Sector::Odd});
  const auto res = lowest_eigenpairs(h, 3, forced(SolverMethod::Krylov));
  for (const auto& ep : res.pairs) {
    double nrm = 0.0;
    for (double x : ep.vector) nrm += x * x;
    EXPECT_NEAR(nrm, 1.0, 1e-12);
    const auto hv = matvec(h, ep.vector);
    double r = 0.0;
    for (std::size_t i = 0; i < hv.size(); ++i) r += std::pow(hv[i] - ep.value * ep.vector[i], 2);
    EXPECT_LE(std::sqrt(r), 1e-10);
  }
}

TEST(Spectra, DeepSuperradiantQuasiDegenerateDoublet) {
  // Without the A-square term the order parameter grows large above g_c0
  // (here g_c0 = 0.4), so the parity doublet is well formed already at N = 8.
  ModelParams p;
  p.omega = 1.0;
  p.delta = 1.0;
  p.tau = 1.5;
  p.u = 0.0;
  p.kappa = 0.0;
  p.g = 1.0;
  double prev_eps = 1e300;
  for (int n_atoms : {8, 16}) {
    p.n_atoms = n_atoms;
    const int n_max = 80;
    const auto spec = solve_sectors(p, n_max, 2, forced(SolverMethod::Krylov));
    EXPECT_NE(spec.pairs[0].parity, spec.pairs[1].parity);
    const double eps = spec.pairs[1].value - spec.pairs[0].value;
    const Eigen::VectorXd ref = oracle::dense_eigenvalues(oracle::dense_hamiltonian(p, n_max));
    EXPECT_NEAR(spec.pairs[0].value, ref[0], 1e-9);
    EXPECT_NEAR(eps, ref[1] - ref[0], 1e-9);
    // Doublet splitting is small against the next excitation.
    EXPECT_LT(eps, 0.1 * (spec.pairs[2].value - spec.pairs[0].value));
    EXPECT_LT(eps, prev_eps);
    prev_eps = eps;
  }
}

TEST(Observables, VacuumAtZeroCoupling) {
  for (double kappa : {0.0, 1.2, 3.0}) {
    ModelParams p = ref_params(0.0, 6);
    p.kappa = kappa;
    const auto obs = observables(solve_sectors(p, 6, 2), p);
    EXPECT_NEAR(obs.nph_total, 0.0, 1e-14);
    EXPECT_NEAR(obs.jz_density, -0.5, 1e-14);
    EXPECT_NEAR(obs.delta_x, 1.0, 1e-14);
    EXPECT_NEAR(obs.e0, -3 * p.delta, 1e-12);
  }
}

TEST(Observables, NearCriticalMatchesDenseOracle) {
  double prev = -1.0;
  for (double f : {0.6, 0.9, 1.0, 1.1, 1.4}) {
    const ModelParams p = ref_params(f * kGc0Ref, 16);
    const auto kry = observables(solve_sectors(p, 40, 2, forced(SolverMethod::Krylov)), p);
    const auto den = observables(solve_sectors(p, 40, 2, forced(SolverMethod::Dense)), p);
    EXPECT_NEAR(kry.nph_density, den.nph_density, 1e-10);
    EXPECT_NEAR(kry.delta_x, den.delta_x, 1e-9);
    EXPECT_NEAR(kry.epsilon, den.epsilon, 1e-10);
    EXPECT_LT(std::abs(kry.mean_x), 1e-10);
    EXPECT_GT(kry.nph_density, prev);
    prev = kry.nph_density;
    // Independent expectation values from the dense full-space ground state.
    const Eigen::MatrixXd h = oracle::dense_hamiltonian(p, 40);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const Eigen::MatrixXd a = oracle::annihilation(40);
    const Eigen::MatrixXd is = Eigen::MatrixXd::Identity(17, 17);
    const Eigen::MatrixXd num = oracle::kron(a.transpose() * a, is);
    const Eigen::VectorXd gs = eig.eigenvectors().col(0);
    EXPECT_NEAR(kry.nph_total, gs.dot(num * gs), 1e-9);
  }
  EXPECT_LT(observables(solve_sectors(ref_params(0.6 * kGc0Ref, 16), 40, 2), ref_params(0.6 * kGc0Ref, 16)).nph_density, 0.01);
}

TEST(Observables, InsufficientStates) {
  const ModelParams p = ref_params(0.1, 4);
  const auto h = build_hamiltonian(p, {4, 10, Sector::Even});
  EXPECT_THROW(observables(lowest_eigenpairs(h, 3), p), InsufficientStates);
  EXPECT_THROW(observables(lowest_eigenpairs(h, 1), p), InsufficientStates);
}

TEST(Spectra, ParityPurityOfFullSectorStates) {
  const ModelParams p = ref_params(0.15, 10);
  const auto h = build_hamiltonian(p, {10, 30, Sector::Full});
  const auto res = lowest_eigenpairs(h, 4, forced(SolverMethod::Krylov));
  for (const auto& ep : res.pairs) EXPECT_GE(ep.parity_weight, 1.0 - 1e-10);
}

TEST(Spectra, CouplingSignSymmetry) {
  for (double g : {0.1, 0.3, 0.6}) {
    const auto a = solve_sectors(ref_params(g, 10), 40, 3).eigenvalues();
    const auto b = solve_sectors(ref_params(-g, 10), 40, 3).eigenvalues();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
  }
}

TEST(Spectra, VariationalMonotonicityInCutoff) {
  const ModelParams p = ref_params(1.3 * kGc0Ref, 12);
  double prev = 1e300;
  for (int n_max : {4, 8, 12, 16, 24, 32, 48}) {
    const double e0 = solve_sectors(p, n_max, 1).pairs[0].value;
    EXPECT_LE(e0, prev + 1e-12);
    prev = e0;
  }
}

TEST(ConvergeCutoff, VacuumConvergesAtInitialCutoff) {
  const ModelParams p = ref_params(0.0, 8);
  CutoffPolicy pol;
  pol.n_initial = 6;
  const auto res = converge_cutoff(p, 2, 1e-12, 1e-10, pol);
  EXPECT_EQ(res.n_max_used, 6);
}

TEST(ConvergeCutoff, ContinuumRegimeRunsAway) {
  ModelParams p = ref_params(0.2, 8);
  p.u = 2.5;
  CutoffPolicy pol;
  pol.n_cap = 200;
  try {
    converge_cutoff(p, 2, 1e-10, 1e-8, pol);
    FAIL() << "expected CutoffRunaway";
  } catch (const CutoffRunaway& e) {
    ASSERT_GE(e.trail().size(), 3u);
    for (std::size_t i = 1; i < e.trail().size(); ++i) {
      EXPECT_GT(e.trail()[i].n_max, e.trail()[i - 1].n_max);
      EXPECT_LT(e.trail()[i].e0, e.trail()[i - 1].e0 - 1.0);
    }
  }
}

TEST(ConvergeCutoff, SuperradiantPointStableUnderFurtherIncrease) {
  const ModelParams p = ref_params(2.0 * kGc0Ref, 32);
  const double energy_tol = 1e-8;
  const auto res = converge_cutoff(p, 2, 1e-10, energy_tol);
  const auto obs = observables(res, p);
  const int bigger = static_cast<int>(std::ceil(res.n_max_used * 1.5));
  const auto more = observables(solve_sectors(p, bigger, 2), p);
  EXPECT_NEAR(obs.e0, more.e0, energy_tol);
  EXPECT_NEAR(obs.nph_total, more.nph_total, 1e-6 * std::max(1.0, more.nph_total));
  EXPECT_GT(obs.nph_density, 0.05);
}
