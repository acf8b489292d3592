#include <dsm/meanfield_thermal.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dsm;

namespace {

ThermalPoint upper_panel(double g, double t = 0.5) {
  ThermalPoint pt;
  pt.params.omega = 1.0;
  pt.params.delta = 0.5;
  pt.params.kappa = 1.0;
  pt.params.tau = 2.5;
  pt.params.u = 0.5;
  pt.params.g = g;
  pt.temperature = t;
  return pt;
}

ThermalPoint lower_panel(double g) {
  ThermalPoint pt = upper_panel(g);
  pt.params.tau = 1.0;
  pt.params.u = 5.5;
  return pt;
}

ModelParams tc_params(double g) {
  ModelParams p;
  p.delta = 0.5;
  p.u = 0.5;
  p.tau = 1.5;
  p.kappa = 1.2;
  p.g = g;
  return p;
}

// Bisection on T for g_c(T) = g, independent of the closed-form T_c.
double tc_by_bisection(const ModelParams& p) {
  double lo = 1e-6, hi = 50.0;
  const auto gap = [&](double t) {
    const auto c = critical_coupling_thermal({p, t});
    return c.has_transition() ? *c.value - p.g : 1.0;
  };
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(FreeEnergy, Origin) {
  const auto pt = upper_panel(0.3);
  EXPECT_DOUBLE_EQ(free_energy(pt, 0.0), -0.5 * std::log(2.0 * std::cosh(0.25 / 0.5)));
}

TEST(FreeEnergy, ComplexFormMatchesRealAxis) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    ThermalPoint pt = upper_panel(0.2 + 0.1 * std::abs(u(rng)), 0.05 + std::abs(u(rng)));
    pt.params.u = u(rng);
    const double a = u(rng);
    EXPECT_NEAR(free_energy(pt, a), free_energy_real(pt, a), 1e-12 * std::max(1.0, std::abs(free_energy(pt, a))));
    EXPECT_NEAR(free_energy_real(pt, a), free_energy_real(pt, -a), 1e-14);
  }
}

TEST(FreeEnergy, LargeBetaDoesNotOverflow) {
  const auto pt = upper_panel(0.3, 1e-6);
  EXPECT_TRUE(std::isfinite(free_energy(pt, {0.7, 0.2})));
}

TEST(CriticalCouplingThermal, KnownValues) {
  const auto up = critical_coupling_thermal(upper_panel(0.0));
  ASSERT_TRUE(up.has_transition());
  EXPECT_NEAR(*up.value, 0.5160, 1e-4);
  EXPECT_NEAR(up.numerator, 0.44223, 1e-5);
  EXPECT_NEAR(up.denominator, 1.6610, 1e-4);

  const auto lo = critical_coupling_thermal(lower_panel(0.0));
  EXPECT_FALSE(lo.has_transition());
  EXPECT_EQ(lo.verdict, CouplingVerdict::Unstable);
  EXPECT_NEAR(lo.formula_value, 0.2509, 1e-4);
}

TEST(CriticalCouplingThermal, InfiniteTemperature) {
  const auto c = critical_coupling_thermal(upper_panel(0.0, 1e9));
  EXPECT_FALSE(c.has_transition());
  EXPECT_EQ(c.verdict, CouplingVerdict::DenominatorNonPositive);
}

TEST(CriticalCouplingThermal, ZeroTemperatureLimit) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int n = 0;
  while (n < 100) {
    ModelParams p;
    p.omega = 0.5 + u01(rng);
    p.delta = 0.2 + 1.5 * u01(rng);
    p.tau = 3.0 * u01(rng);
    p.kappa = 2.0 * u01(rng);
    p.u = (-1.5 + 3.4 * u01(rng)) * p.omega;
    const auto z = critical_coupling_zero(p);
    if (!z.has_transition()) continue;
    const auto t = critical_coupling_thermal({p, 1e-6 / p.omega});
    ASSERT_TRUE(t.has_transition());
    EXPECT_NEAR(*t.value, *z.value, 1e-6 * *z.value);
    ++n;
  }
}

TEST(CriticalTemperature, AtQuantumCriticalPoint) {
  const double gc0 = *critical_coupling_zero(tc_params(0.0)).value;
  EXPECT_NEAR(gc0, 0.5085, 1e-4);
  const auto t = critical_temperature(tc_params(gc0));
  EXPECT_EQ(t.verdict, TcVerdict::AtQuantumCriticalPoint);
  EXPECT_EQ(*t.value, 0.0);
  EXPECT_FALSE(critical_temperature(tc_params(0.9 * gc0)).has_value());
  EXPECT_EQ(critical_temperature(tc_params(0.9 * gc0)).verdict, TcVerdict::BelowQuantumCritical);
}

TEST(CriticalTemperature, MatchesBisectionOnCriticalCoupling) {
  for (double g : {0.55, 0.7, 1.0, 2.0}) {
    const auto p = tc_params(g);
    const auto t = critical_temperature(p);
    ASSERT_TRUE(t.has_value()) << g;
    EXPECT_NEAR(*t.value, tc_by_bisection(p), 1e-9 * *t.value) << g;
    const auto back = critical_coupling_thermal({p, *t.value});
    ASSERT_TRUE(back.has_transition());
    EXPECT_NEAR(*back.value, g, 1e-8 * g);
  }
}

TEST(OrderParameterThermal, NormalBelowCritical) {
  const auto s = order_parameter_thermal(upper_panel(0.4));
  EXPECT_EQ(s.phase, Phase::Normal);
  EXPECT_EQ(s.alpha_intensive, 0.0);
}

TEST(OrderParameterThermal, SuperradiantIsMinimum) {
  const auto pt = upper_panel(1.2 * 0.5160);
  const auto s = order_parameter_thermal(pt);
  ASSERT_EQ(s.phase, Phase::Superradiant);
  EXPECT_LT(s.free_energy_per_atom, free_energy_real(pt, 0.0));
  EXPECT_LT(std::abs(s.residual), 1e-10);
  const double a = s.alpha_intensive, h = 1e-5;
  const double d1 = (free_energy_real(pt, a + h) - free_energy_real(pt, a - h)) / (2 * h);
  EXPECT_LT(std::abs(d1), 1e-8);
}

TEST(OrderParameterThermal, GrowsBelowTc) {
  for (auto [u, tau] : {std::pair{0.5, 2.5}, std::pair{1.5, 3.0}}) {
    ModelParams p;
    p.delta = 0.5;
    p.kappa = 1.2;
    p.g = 0.5;
    p.u = u;
    p.tau = tau;
    const auto tc = critical_temperature(p);
    ASSERT_TRUE(tc.has_value());
    double prev = 0.0;
    for (int i = 21; i >= 1; --i) {
      if (i == 20) continue;
      const double r = 0.05 * i;
      const auto s = order_parameter_thermal({p, r * *tc.value});
      if (i > 20) {
        EXPECT_EQ(s.phase, Phase::Normal);
      } else {
        EXPECT_EQ(s.phase, Phase::Superradiant);
        EXPECT_GT(s.alpha_intensive, prev);
      }
      prev = s.alpha_intensive;
    }
  }
}

TEST(OrderParameterThermal, ContinuousAtTc) {
  const auto p = tc_params(0.7);
  const double tc = *critical_temperature(p).value;
  const auto s = order_parameter_thermal({p, tc * (1.0 - 1e-3)});
  EXPECT_EQ(s.phase, Phase::Superradiant);
  EXPECT_LT(s.alpha_intensive, 0.05);
}

TEST(OrderParameterThermal, LowTemperatureMatchesZeroT) {
  for (double g : {0.6, 0.9, 1.5}) {
    ModelParams p = tc_params(g);
    p.u = 0.0;
    const auto cold = order_parameter_thermal({p, 1e-4});
    const auto zero = order_parameters(p);
    ASSERT_EQ(zero.phase, Phase::Superradiant);
    EXPECT_NEAR(cold.alpha_intensive, zero.alpha, 1e-8) << g;
    EXPECT_NEAR(cold.free_energy_per_atom, zero.energy_per_atom, 1e-10) << g;
  }
  // with a Stark term as well
  const auto p = tc_params(0.9);
  EXPECT_NEAR(order_parameter_thermal({p, 1e-4}).alpha_intensive, order_parameters(p).alpha, 1e-8);
  EXPECT_EQ(order_parameter_thermal({p, 0.0}).alpha_intensive, order_parameters(p).alpha);
}

TEST(OrderParameterThermal, LandauConsistency) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int n = 0;
  while (n < 60) {
    ThermalPoint pt;
    pt.params.delta = 0.2 + u01(rng);
    pt.params.tau = 3.0 * u01(rng);
    pt.params.kappa = 1.5 * u01(rng);
    pt.params.u = -1.0 + 2.5 * u01(rng);
    pt.temperature = 0.02 + u01(rng);
    const auto c = critical_coupling_thermal(pt);
    if (!c.has_transition()) continue;
    pt.params.g = *c.value * (0.5 + u01(rng));
    if (std::abs(pt.params.g / *c.value - 1.0) < 1e-3) continue;
    const auto s = order_parameter_thermal(pt);
    const bool broken = pt.params.g > *c.value;
    EXPECT_EQ(s.phase == Phase::Superradiant, broken) << n;
    if (broken) {
      EXPECT_LT(s.free_energy_per_atom, free_energy_real(pt, 0.0));
      EXPECT_LT(std::abs(s.residual), 1e-8);
    }
    ++n;
  }
}

TEST(OrderParameterThermal, UnboundedIsUnstable) {
  const auto s = order_parameter_thermal(lower_panel(1.2 * 0.2509));
  EXPECT_EQ(s.phase, Phase::Unstable);
}

TEST(Landscape, UpperPanelAboveCritical) {
  const auto pt = upper_panel(1.2 * 0.5160);
  const auto l = landscape_grid(pt, {-1.5, 1.5}, {-1.5, 1.5}, 121, 121);
  ASSERT_EQ(l.minima.size(), 2u);
  EXPECT_EQ(l.minima[0].y, 0.0);
  EXPECT_EQ(l.minima[1].y, 0.0);
  EXPECT_DOUBLE_EQ(l.minima[0].x, -l.minima[1].x);
  EXPECT_LT(l.minima[0].value, 0.0);
  EXPECT_EQ(l.phase, Phase::Superradiant);
  const double a = order_parameter_thermal(pt).alpha_intensive;
  EXPECT_NEAR(std::abs(l.minima[0].x), a, 3.0 / 120);
}

TEST(Landscape, UpperPanelBelowCritical) {
  const auto l = landscape_grid(upper_panel(0.8 * 0.5160), {-1.5, 1.5}, {-1.5, 1.5}, 121, 121);
  ASSERT_EQ(l.minima.size(), 1u);
  EXPECT_EQ(l.minima[0].x, 0.0);
  EXPECT_EQ(l.minima[0].y, 0.0);
  EXPECT_EQ(l.phase, Phase::Normal);
}

TEST(Landscape, LowerPanelUnstable) {
  const auto l = landscape_grid(lower_panel(1.2 * 0.2509), {-1.5, 1.5}, {-1.5, 1.5}, 121, 121);
  EXPECT_EQ(l.phase, Phase::Unstable);
  for (const auto& m : l.minima) EXPECT_FALSE(m.y == 0.0 && m.x != 0.0 && m.value < 0.0);
  bool off_axis_max = false;
  for (const auto& m : l.maxima) off_axis_max |= m.y != 0.0;
  EXPECT_TRUE(off_axis_max);
}

TEST(Landscape, ResolutionGuard) {
  EXPECT_THROW(landscape_grid(upper_panel(0.3), {-1, 1}, {-1, 1}, 16, 64), InvalidParameters);
}
