#pragma once

// Anisotropic Dicke-Stark Hamiltonian with an A-square term, restricted to the
// symmetric (j = N/2) Dicke manifold:
//
//   H = w a+a + Delta Jz + (g/sqrt N)(a+ J- + a J+) + (g tau/sqrt N)(a+ J+ + a J-)
//       + (U/N) a+a Jz + D (a+ + a)^2,        D = kappa g^2 / Delta
//
// Basis states |n, k> carry photon number n in [0, n_max] and spin ladder index
// k = m + N/2 in [0, N] (k counts excited atoms, Jz = k - N/2). With j = N/2:
//
//   J+ |k> = sqrt((k + 1)(N - k)) |k + 1>
//   J- |k> = sqrt(k (N - k + 1))  |k - 1>
//
// Z2 parity exp[i pi (a+a + Jz + N/2)] acts as (-1)^(n + k); every term above
// changes n + k by 0 or 2, so H is block diagonal in the two parity sectors.

#include <dsm/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsm {

struct ModelParams {
  double omega = 1.0;  // cavity frequency, sets the energy unit
  double delta = 1.0;  // atomic splitting
  double g = 0.0;      // rotating-wave coupling
  double tau = 1.0;    // counter-rotating / rotating coupling ratio
  double u = 0.0;      // Stark coupling
  double kappa = 0.0;  // A-square coefficient, D = kappa g^2 / delta
  int n_atoms = 1;

  /// Coefficient D of the A-square term.
  double a_square() const noexcept { return kappa * g * g / delta; }

  /// Effective coupling g' = g (1 + tau).
  double g_prime() const noexcept { return g * (1.0 + tau); }

  void validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega))
      throw InvalidParameters("omega must be positive and finite");
    if (!(delta > 0.0) || !std::isfinite(delta))
      throw InvalidParameters("delta must be positive and finite");
    if (!std::isfinite(g) || !std::isfinite(tau) || !std::isfinite(u))
      throw InvalidParameters("g, tau and u must be finite");
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
      throw InvalidParameters("kappa must be non-negative");
    if (n_atoms < 1) throw InvalidParameters("n_atoms must be >= 1");
  }
};

enum class ParamWarning {
  ContinuumRegime,           // u >= 2 omega
  BeyondRabiStarkContinuum,  // u <= -2 omega
  BelowTrkBound,             // kappa < 1
};

inline std::string_view to_string(ParamWarning w) noexcept {
  switch (w) {
    case ParamWarning::ContinuumRegime: return "ContinuumRegime";
    case ParamWarning::BeyondRabiStarkContinuum: return "BeyondRabiStarkContinuum";
    case ParamWarning::BelowTrkBound: return "BelowTrkBound";
  }
  return "?";
}

/// Non-fatal diagnostics for a parameter set.
inline std::vector<ParamWarning> warnings(const ModelParams& p) {
  std::vector<ParamWarning> out;
  if (p.u >= 2.0 * p.omega) out.push_back(ParamWarning::ContinuumRegime);
  if (p.u <= -2.0 * p.omega) out.push_back(ParamWarning::BeyondRabiStarkContinuum);
  if (p.kappa < 1.0) out.push_back(ParamWarning::BelowTrkBound);
  return out;
}

enum class Sector { Even, Odd, Full };

inline std::string_view to_string(Sector s) noexcept {
  switch (s) {
    case Sector::Even: return "even";
    case Sector::Odd: return "odd";
    case Sector::Full: return "full";
  }
  return "?";
}

/// (-1)^(n + k).
constexpr int parity_of(long n, long k) noexcept { return ((n + k) % 2 == 0) ? 1 : -1; }

struct BasisSpec {
  int n_atoms = 1;
  int n_max = 1;
  Sector sector = Sector::Full;

  std::size_t full_dim() const noexcept {
    return static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_atoms + 1);
  }
};

struct BasisState {
  int n;  // photons
  int k;  // excited atoms
};

/// Enumeration of the basis states of one sector, ordered by (n, k).
class Basis {
public:
  explicit Basis(BasisSpec spec) : spec_(spec) {
    if (spec.n_atoms < 1) throw InvalidParameters("basis needs n_atoms >= 1");
    if (spec.n_max < 0) throw InvalidParameters("basis needs n_max >= 0");
    const int nk = spec.n_atoms + 1;
    index_.assign(spec.full_dim(), npos);
    states_.reserve(spec.sector == Sector::Full ? spec.full_dim() : spec.full_dim() / 2 + 1);
    for (int n = 0; n <= spec.n_max; ++n) {
      for (int k = 0; k < nk; ++k) {
        if (!in_sector(n, k)) continue;
        index_[flat(n, k)] = static_cast<std::int64_t>(states_.size());
        states_.push_back({n, k});
      }
    }
  }

  static constexpr std::int64_t npos = -1;

  const BasisSpec& spec() const noexcept { return spec_; }
  std::size_t dim() const noexcept { return states_.size(); }
  const BasisState& state(std::size_t i) const { return states_[i]; }
  std::span<const BasisState> states() const noexcept { return states_; }

  /// Index of |n, k> in this sector, or npos if outside the sector or cutoff.
  std::int64_t index_of(int n, int k) const noexcept {
    if (n < 0 || n > spec_.n_max || k < 0 || k > spec_.n_atoms) return npos;
    return index_[flat(n, k)];
  }

  bool in_sector(int n, int k) const noexcept {
    switch (spec_.sector) {
      case Sector::Even: return parity_of(n, k) == 1;
      case Sector::Odd: return parity_of(n, k) == -1;
      case Sector::Full: return true;
    }
    return false;
  }

private:
  std::size_t flat(int n, int k) const noexcept {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(spec_.n_atoms + 1) +
           static_cast<std::size_t>(k);
  }

  BasisSpec spec_;
  std::vector<BasisState> states_;
  std::vector<std::int64_t> index_;
};

struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Real symmetric sparse matrix stored as its upper triangle (row <= col),
/// entries sorted by row then column.
class SparseHamiltonian {
public:
  SparseHamiltonian(std::shared_ptr<const Basis> basis, std::vector<MatrixEntry> entries)
      : basis_(std::move(basis)), entries_(std::move(entries)) {}

  std::size_t dim() const noexcept { return basis_->dim(); }
  const Basis& basis() const noexcept { return *basis_; }
  std::shared_ptr<const Basis> basis_ptr() const noexcept { return basis_; }
  std::span<const MatrixEntry> entries() const noexcept { return entries_; }

  std::vector<double> diagonal() const {
    std::vector<double> d(dim(), 0.0);
    for (const auto& e : entries_)
      if (e.row == e.col) d[e.row] += e.value;
    return d;
  }

private:
  std::shared_ptr<const Basis> basis_;
  std::vector<MatrixEntry> entries_;
};

/// y = H x using the symmetric upper-triangle storage.
inline void matvec(const SparseHamiltonian& h, std::span<const double> x, std::span<double> y) {
  if (x.size() != h.dim() || y.size() != h.dim())
    throw DimensionMismatch("matvec: vector length " + std::to_string(x.size()) +
                            " does not match dimension " + std::to_string(h.dim()));
  std::fill(y.begin(), y.end(), 0.0);
  for (const auto& e : h.entries()) {
    y[e.row] += e.value * x[e.col];
    if (e.row != e.col) y[e.col] += e.value * x[e.row];
  }
}

inline std::vector<double> matvec(const SparseHamiltonian& h, std::span<const double> x) {
  std::vector<double> y(h.dim());
  matvec(h, x, y);
  return y;
}

struct AssemblyOptions {
  std::size_t max_full_dim = 40'000'000;
};

/// Diagonal matrix element <n, k|H|n, k>.
inline double diagonal_element(const ModelParams& p, int n, int k) noexcept {
  const double jz = k - 0.5 * p.n_atoms;
  const double d = p.a_square();
  return p.omega * n + p.delta * jz + (p.u / p.n_atoms) * n * jz + d * (2.0 * n + 1.0);
}

inline SparseHamiltonian build_hamiltonian(const ModelParams& p, const BasisSpec& spec,
                                           const AssemblyOptions& opts = {}) {
  p.validate();
  if (spec.n_atoms != p.n_atoms)
    throw SectorMismatch("basis is for N = " + std::to_string(spec.n_atoms) +
                         " atoms but parameters have N = " + std::to_string(p.n_atoms));
  if (spec.n_max < 1) throw InvalidParameters("photon cutoff n_max must be >= 1");
  const double full = static_cast<double>(spec.n_max + 1) * static_cast<double>(spec.n_atoms + 1);
  if (full > static_cast<double>(opts.max_full_dim))
    throw DimensionOverflow("basis dimension " + std::to_string(static_cast<long long>(full)) +
                            " exceeds cap " + std::to_string(opts.max_full_dim));

  auto basis = std::make_shared<const Basis>(spec);
  const int big_n = p.n_atoms;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(big_n));
  const double rw = p.g * inv_sqrt_n;
  const double crw = p.g * p.tau * inv_sqrt_n;
  const double d = p.a_square();

  std::vector<MatrixEntry> entries;
  entries.reserve(basis->dim() * 4);
  for (std::size_t i = 0; i < basis->dim(); ++i) {
    const auto [n, k] = basis->state(i);
    entries.push_back({i, i, diagonal_element(p, n, k)});
    // Couplings to states with larger index only (upper triangle). Index order
    // follows n, so every partner with n + 1 or n + 2 sits above the diagonal.
    auto add = [&](int n2, int k2, double value) {
      if (value == 0.0) return;
      const auto j = basis->index_of(n2, k2);
      if (j == Basis::npos) return;
      entries.push_back({i, static_cast<std::size_t>(j), value});
    };
    const double sn1 = std::sqrt(static_cast<double>(n + 1));
    // a+ J-: |n, k> -> |n + 1, k - 1>
    if (k >= 1) add(n + 1, k - 1, rw * sn1 * std::sqrt(double(k) * double(big_n - k + 1)));
    // a+ J+: |n, k> -> |n + 1, k + 1>
    if (k < big_n) add(n + 1, k + 1, crw * sn1 * std::sqrt(double(k + 1) * double(big_n - k)));
    // D a+^2: |n, k> -> |n + 2, k>
    add(n + 2, k, d * std::sqrt(double(n + 1) * double(n + 2)));
  }
  std::sort(entries.begin(), entries.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return SparseHamiltonian(std::move(basis), std::move(entries));
}

}  // namespace dsm
