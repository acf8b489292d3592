#include "oracles.hpp"

#include <dsm/model.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace dsm;

namespace {

ModelParams generic(int n_atoms) {
  ModelParams p;
  p.omega = 1.0;
  p.delta = 0.7;
  p.g = 0.45;
  p.tau = 1.8;
  p.u = 0.6;
  p.kappa = 1.3;
  p.n_atoms = n_atoms;
  return p;
}

// Embed a sector matrix into the full product space of the dense oracle.
Eigen::MatrixXd embed(const SparseHamiltonian& h) {
  const auto& b = h.basis();
  const auto full = static_cast<Eigen::Index>(b.spec().full_dim());
  const Eigen::MatrixXd sector = oracle::dense_of(h);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(full, full);
  const int nk = b.spec().n_atoms + 1;
  for (std::size_t i = 0; i < b.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) {
      const auto si = b.state(i), sj = b.state(j);
      out(si.n * nk + si.k, sj.n * nk + sj.k) = sector(i, j);
    }
  return out;
}

}  // namespace

TEST(Parity, Examples) {
  EXPECT_EQ(parity_of(0, 0), 1);
  EXPECT_EQ(parity_of(1, 0), -1);
  EXPECT_EQ(parity_of(3, 5), 1);
}

TEST(Basis, SectorDimensionsSumToFull) {
  for (int n_atoms : {1, 2, 5, 8}) {
    for (int n_max : {0, 1, 4, 7}) {
      const Basis full({n_atoms, n_max, Sector::Full});
      const Basis even({n_atoms, n_max, Sector::Even});
      const Basis odd({n_atoms, n_max, Sector::Odd});
      EXPECT_EQ(full.dim(), static_cast<std::size_t>((n_max + 1) * (n_atoms + 1)));
      EXPECT_EQ(even.dim() + odd.dim(), full.dim());
      for (const auto& s : even.states()) EXPECT_EQ(parity_of(s.n, s.k), 1);
      for (const auto& s : odd.states()) EXPECT_EQ(parity_of(s.n, s.k), -1);
    }
  }
}

TEST(Basis, IndexRoundTrip) {
  const Basis b({4, 6, Sector::Odd});
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const auto s = b.state(i);
    EXPECT_EQ(b.index_of(s.n, s.k), static_cast<std::int64_t>(i));
  }
  EXPECT_EQ(b.index_of(0, 0), Basis::npos);  // even state
  EXPECT_EQ(b.index_of(7, 0), Basis::npos);  // above cutoff
  EXPECT_EQ(b.index_of(0, 5), Basis::npos);  // k > N
}

TEST(BuildHamiltonian, DecoupledLimitIsDiagonal) {
  ModelParams p = generic(6);
  p.g = 0.0;
  p.u = 0.0;
  const auto h = build_hamiltonian(p, {6, 5, Sector::Full});
  for (const auto& e : h.entries()) EXPECT_EQ(e.row, e.col);
  const auto d = h.diagonal();
  EXPECT_DOUBLE_EQ(*std::min_element(d.begin(), d.end()), -6 * p.delta / 2);
}

TEST(BuildHamiltonian, MatchesDenseTensorProductSingleAtom) {
  const ModelParams p = generic(1);
  const int n_max = 2;
  const auto h = build_hamiltonian(p, {1, n_max, Sector::Full});
  ASSERT_EQ(h.dim(), 6u);
  const Eigen::MatrixXd ref = oracle::dense_hamiltonian(p, n_max);
  EXPECT_LT((embed(h) - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BuildHamiltonian, MatchesDenseTensorProductManyAtoms) {
  for (int n_atoms : {2, 3, 6}) {
    const ModelParams p = generic(n_atoms);
    const int n_max = 5;
    const Eigen::MatrixXd ref = oracle::dense_hamiltonian(p, n_max);
    const auto full = build_hamiltonian(p, {n_atoms, n_max, Sector::Full});
    EXPECT_LT((embed(full) - ref).cwiseAbs().maxCoeff(), 1e-13) << "N = " << n_atoms;
    const auto even = build_hamiltonian(p, {n_atoms, n_max, Sector::Even});
    const auto odd = build_hamiltonian(p, {n_atoms, n_max, Sector::Odd});
    EXPECT_LT((embed(even) + embed(odd) - ref).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(BuildHamiltonian, UpperTriangleAndParityBlocks) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int n_atoms = 1 + static_cast<int>(rng() % 9);
    const ModelParams p = oracle::random_params(rng, n_atoms);
    const auto h = build_hamiltonian(p, {n_atoms, 6, Sector::Full});
    for (const auto& e : h.entries()) {
      EXPECT_LE(e.row, e.col);
      const auto si = h.basis().state(e.row), sj = h.basis().state(e.col);
      if (e.value != 0.0) {
        EXPECT_EQ(parity_of(si.n, si.k), parity_of(sj.n, sj.k));
      }
    }
  }
}

TEST(Matvec, AgreesWithDenseProduct) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int n_atoms = 1 + static_cast<int>(rng() % 12);
    const int n_max = 1 + static_cast<int>(rng() % 12);
    if ((n_max + 1) * (n_atoms + 1) > 200) continue;
    const ModelParams p = oracle::random_params(rng, n_atoms);
    const Sector s = std::array{Sector::Full, Sector::Even, Sector::Odd}[trial % 3];
    const auto h = build_hamiltonian(p, {n_atoms, n_max, s});
    Eigen::VectorXd x(static_cast<Eigen::Index>(h.dim()));
    for (auto& v : x) v = normal(rng);
    const auto y = matvec(h, std::span<const double>(x.data(), h.dim()));
    const Eigen::VectorXd ref = oracle::dense_of(h) * x;
    const Eigen::Map<const Eigen::VectorXd> got(y.data(), static_cast<Eigen::Index>(y.size()));
    EXPECT_LE((got - ref).norm(), 1e-12 * std::max(1.0, ref.norm()));
  }
}

TEST(Matvec, UnitAndZeroVectors) {
  ModelParams p = generic(4);
  p.g = 0.0;
  p.u = 0.0;
  const auto h = build_hamiltonian(p, {4, 3, Sector::Full});
  const auto d = h.diagonal();
  std::vector<double> e(h.dim(), 0.0);
  e[5] = 1.0;
  const auto y = matvec(h, e);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y[i], i == 5 ? d[5] : 0.0);

  const auto h2 = build_hamiltonian(generic(4), {4, 3, Sector::Full});
  const std::vector<double> zero(h2.dim(), 0.0);
  for (double v : matvec(h2, zero)) EXPECT_EQ(v, 0.0);
}

TEST(Matvec, DimensionMismatch) {
  const auto h = build_hamiltonian(generic(2), {2, 2, Sector::Even});
  const std::vector<double> x(h.dim() + 1, 1.0);
  EXPECT_THROW(matvec(h, x), DimensionMismatch);
}

TEST(BuildHamiltonian, FullGroundIsMinOfSectors) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n_atoms = 2 + static_cast<int>(rng() % 10);
    const int n_max = 500 / (n_atoms + 1) - 1;
    ModelParams p = oracle::random_params(rng, n_atoms);
    p.u = std::min(p.u, 1.5 * p.omega);
    const double full = oracle::dense_eigenvalues(oracle::dense_of(
        build_hamiltonian(p, {n_atoms, n_max, Sector::Full})))[0];
    const double even = oracle::dense_eigenvalues(oracle::dense_of(
        build_hamiltonian(p, {n_atoms, n_max, Sector::Even})))[0];
    const double odd = oracle::dense_eigenvalues(oracle::dense_of(
        build_hamiltonian(p, {n_atoms, n_max, Sector::Odd})))[0];
    EXPECT_NEAR(full, std::min(even, odd), 1e-10 * std::abs(full));
  }
}

TEST(BuildHamiltonian, ReducesToStandardDicke) {
  for (int n_atoms : {2, 5, 9}) {
    ModelParams p;
    p.omega = 1.0;
    p.delta = 0.8;
    p.g = 0.55;
    p.tau = 1.0;
    p.u = 0.0;
    p.kappa = 0.0;
    p.n_atoms = n_atoms;
    const int n_max = 14;
    const Eigen::VectorXd ours = oracle::dense_eigenvalues(
        oracle::dense_of(build_hamiltonian(p, {n_atoms, n_max, Sector::Full})));
    const Eigen::VectorXd ref = oracle::dense_eigenvalues(
        oracle::dense_standard_dicke(p.omega, p.delta, p.g, n_atoms, n_max));
    EXPECT_LT((ours - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(BuildHamiltonian, Errors) {
  const ModelParams p = generic(3);
  EXPECT_THROW(build_hamiltonian(p, {4, 3, Sector::Full}), SectorMismatch);
  EXPECT_THROW(build_hamiltonian(p, {3, 0, Sector::Full}), InvalidParameters);
  AssemblyOptions cap;
  cap.max_full_dim = 100;
  EXPECT_THROW(build_hamiltonian(p, {3, 30, Sector::Full}, cap), DimensionOverflow);
  ModelParams bad = p;
  bad.delta = 0.0;
  EXPECT_THROW(build_hamiltonian(bad, {3, 3, Sector::Full}), InvalidParameters);
}

TEST(ModelParams, Warnings) {
  ModelParams p = generic(2);
  p.u = 2.0;
  auto w = warnings(p);
  EXPECT_NE(std::find(w.begin(), w.end(), ParamWarning::ContinuumRegime), w.end());
  p.u = -2.5;
  w = warnings(p);
  EXPECT_NE(std::find(w.begin(), w.end(), ParamWarning::BeyondRabiStarkContinuum), w.end());
  p.u = 0.5;
  p.kappa = 0.5;
  w = warnings(p);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0], ParamWarning::BelowTrkBound);
}
