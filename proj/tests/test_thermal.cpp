#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "aggtherm/thermal.hpp"
#include "oracles.hpp"

using namespace aggtherm;

namespace {

ZoneParams random_params(oracles::TestRng& rng) {
  return {rng.uniform(0.5, 3.0),  rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0),
          rng.uniform(1.0, 6.0),  rng.uniform(2.0, 10.0), rng.uniform(0.0, 1.0),
          rng.uniform(0.0, 20.0)};
}

}  // namespace

TEST_CASE("zone derivative vanishes at thermal equilibrium") {
  const ZoneParams p{1.0, 0.7, 0.8, 3.5, 5.0, 0.4, 15.0};
  const ZoneState x{21.0, 21.0};
  const ZoneInputs u{21.0, 0.0, 0.0, 0.0};
  const auto d = zone_derivative(x, u, p);
  CHECK(d.d_t_z == 0.0);
  CHECK(d.d_t_w == 0.0);
}

TEST_CASE("only the cooling term survives at equal temperatures") {
  const ZoneParams p{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
  const ZoneState x{22.0, 22.0};
  const ZoneInputs u{22.0, 0.0, 1.0, 0.0};
  const auto d = zone_derivative(x, u, p);
  CHECK(d.d_t_z == doctest::Approx(-2.0));
  CHECK(d.d_t_w == doctest::Approx(0.0));
}

TEST_CASE("zone derivative matches an independent transcription") {
  oracles::TestRng rng(11);
  for (int i = 0; i < 50; ++i) {
    const ZoneParams p = random_params(rng);
    const ZoneState x{rng.uniform(10, 40), rng.uniform(10, 40)};
    const ZoneInputs u{rng.uniform(-5, 40), rng.uniform(0, 1), rng.uniform(0, 5),
                       rng.uniform(0, 3)};
    const auto got = zone_derivative(x, u, p);
    const auto want = oracles::zone_rhs_literal(x, u, p);
    CHECK(got.d_t_z == doctest::Approx(want.d_t_z).epsilon(1e-14));
    CHECK(got.d_t_w == doctest::Approx(want.d_t_w).epsilon(1e-14));
  }
}

TEST_CASE("non-finite inputs are rejected") {
  const ZoneParams p{1.0, 0.7, 0.8, 3.5, 5.0, 0.4, 15.0};
  const double nan = std::nan("");
  CHECK_THROWS_AS(zone_derivative({nan, 20.0}, {20, 0, 0, 0}, p), Error);
  CHECK_THROWS_AS(zone_derivative({20.0, 20.0}, {20, nan, 0, 0}, p), Error);
}

TEST_CASE("invalid zone parameters are rejected") {
  CHECK_THROWS_AS(validate(ZoneParams{-1.0, 0.7, 0.8, 3.5, 5.0, 0.4, 15.0}), Error);
  CHECK_THROWS_AS(validate(ZoneParams{1.0, 0.0, 0.8, 3.5, 5.0, 0.4, 15.0}), Error);
  CHECK_THROWS_AS(validate(ZoneParams{1.0, 0.7, 0.8, 3.5, 5.0, -0.1, 15.0}), Error);
}

TEST_CASE("single-zone building derivative equals the zone derivative") {
  oracles::TestRng rng(5);
  const ZoneParams p = random_params(rng);
  const auto model = make_building_model({p});
  const ZoneState x{25.0, 28.0};
  const ZoneInputs u{31.0, 0.5, 1.2, 0.3};
  const auto d = building_derivative(std::vector{x}, std::vector{u}, model);
  const auto d0 = zone_derivative(x, u, p);
  CHECK(d[0].d_t_z == d0.d_t_z);
  CHECK(d[0].d_t_w == d0.d_t_w);
}

TEST_CASE("interaction term vanishes for equal zone temperatures") {
  oracles::TestRng rng(6);
  const ZoneParams p1 = random_params(rng);
  const ZoneParams p2 = random_params(rng);
  Eigen::MatrixXd r(2, 2);
  r << 0, 2.0, 2.0, 0;
  const auto coupled = make_building_model({p1, p2}, r);
  const auto standalone = make_building_model({p1, p2});
  const std::vector<ZoneState> x{{24.0, 27.0}, {24.0, 30.0}};
  const std::vector<ZoneInputs> u{{30, 0.2, 1, 0.5}, {30, 0.4, 0, 0.1}};
  const auto dc = building_derivative(x, u, coupled);
  const auto ds = building_derivative(x, u, standalone);
  for (int j = 0; j < 2; ++j) {
    CHECK(dc[j].d_t_z == ds[j].d_t_z);
    CHECK(dc[j].d_t_w == ds[j].d_t_w);
  }
}

TEST_CASE("two coupled zones gain the hand-computed interaction term") {
  const ZoneParams p1{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
  const ZoneParams p2{1.4, 0.9, 0.6, 2.5, 7.0, 0.3, 12.0};
  Eigen::MatrixXd r(2, 2);
  r << 0, 4.0, 4.0, 0;
  const auto coupled = make_building_model({p1, p2}, r);
  const auto standalone = make_building_model({p1, p2});
  const std::vector<ZoneState> x{{26.0, 27.0}, {22.0, 30.0}};
  const std::vector<ZoneInputs> u{{30, 0.2, 1, 0.5}, {30, 0.4, 0, 0.1}};
  const auto dc = building_derivative(x, u, coupled);
  const auto ds = building_derivative(x, u, standalone);
  // zone 1 gains (T_z^2 - T_z^1)/(R12 c_z^1), zone 2 the mirror term
  CHECK(dc[0].d_t_z - ds[0].d_t_z ==
        doctest::Approx((22.0 - 26.0) / (4.0 * 0.5)).epsilon(1e-14));
  CHECK(dc[1].d_t_z - ds[1].d_t_z ==
        doctest::Approx((26.0 - 22.0) / (4.0 * 0.9)).epsilon(1e-14));
  CHECK(dc[0].d_t_w == ds[0].d_t_w);
  CHECK(dc[1].d_t_w == ds[1].d_t_w);
}

TEST_CASE("asymmetric interaction matrix is rejected at construction") {
  const ZoneParams p{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
  Eigen::MatrixXd r(2, 2);
  r << 0, 2.0, 3.0, 0;
  CHECK_THROWS_AS(make_building_model({p, p}, r), Error);
  r << 0, -1.0, -1.0, 0;
  CHECK_THROWS_AS(make_building_model({p, p}, r), Error);
}

TEST_CASE("interaction contributions cancel exactly for equal capacitances") {
  const ZoneParams base{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
  ZoneParams other = base;
  other.r_za = 1.7;
  other.a_w = 9.0;  // heterogeneous apart from c_z
  Eigen::MatrixXd r(2, 2);
  r << 0, 3.0, 3.0, 0;
  const auto coupled = make_building_model({base, other}, r);
  const auto standalone = make_building_model({base, other});
  oracles::TestRng rng(7);
  for (int i = 0; i < 20; ++i) {
    const std::vector<ZoneState> x{{rng.uniform(15, 35), rng.uniform(15, 35)},
                                   {rng.uniform(15, 35), rng.uniform(15, 35)}};
    const std::vector<ZoneInputs> u{
        {rng.uniform(0, 35), rng.uniform(0, 1), rng.uniform(0, 3), rng.uniform(0, 1)},
        {rng.uniform(0, 35), rng.uniform(0, 1), rng.uniform(0, 3), rng.uniform(0, 1)}};
    const auto dc = building_derivative(x, u, coupled);
    const auto ds = building_derivative(x, u, standalone);
    // the two coupling terms are exact negations; extracting them from the
    // full derivatives only adds rounding of the base terms
    const double sum =
        (dc[0].d_t_z - ds[0].d_t_z) + (dc[1].d_t_z - ds[1].d_t_z);
    const double scale = std::max({1.0, std::abs(dc[0].d_t_z), std::abs(dc[1].d_t_z)});
    CHECK(std::abs(sum) <= 8 * std::numeric_limits<double>::epsilon() * scale);
  }
}

TEST_CASE("euler step holds fixed points and scales with the derivative") {
  const ZoneParams p{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
  const auto model = make_building_model({p});

  const std::vector<ZoneState> eq{{21.0, 21.0}};
  const std::vector<ZoneInputs> u0{{21.0, 0.0, 0.0, 0.0}};
  const auto held = step_forward_euler(eq, u0, model, 0.25);
  CHECK(held[0].t_z == 21.0);
  CHECK(held[0].t_w == 21.0);

  // derivative (-2, 0) degC/h over a quarter hour moves T_z by -0.5
  const std::vector<ZoneState> x{{22.0, 22.0}};
  const std::vector<ZoneInputs> u1{{22.0, 0.0, 1.0, 0.0}};
  const auto next = step_forward_euler(x, u1, model, 0.25);
  CHECK(next[0].t_z == doctest::Approx(21.5));
  CHECK(next[0].t_w == doctest::Approx(22.0));

  CHECK_THROWS_AS(step_forward_euler(x, u1, model, 0.0), Error);
}

TEST_CASE("euler error halves with the step against an RK4 reference") {
  oracles::TestRng rng(8);
  const auto model = make_building_model({random_params(rng), random_params(rng)});
  const oracles::InputFn input = [](double t, std::size_t zone) {
    const double w = 2.0 * std::numbers::pi / 24.0;
    return ZoneInputs{25.0 + 5.0 * std::sin(w * t + 0.3 * static_cast<double>(zone)),
                      0.4 * (1.0 + std::sin(w * t - 1.0)),
                      1.0 + 0.8 * std::sin(2 * w * t),
                      0.5 + 0.4 * std::sin(w * t + 1.0)};
  };
  const std::vector<ZoneState> x0{{24.0, 26.0}, {23.0, 25.0}};

  auto max_deviation = [&](double t_s) {
    const auto n = static_cast<Eigen::Index>(std::llround(12.0 / t_s)) + 1;
    std::vector<ZoneInputTrace> traces(2);
    for (std::size_t j = 0; j < 2; ++j) {
      auto& tr = traces[j];
      tr.t_a.resize(n);
      tr.eta_solar.resize(n);
      tr.q_ac.resize(n);
      tr.q_int.resize(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const auto u = input(static_cast<double>(k) * t_s, j);
        tr.t_a[k] = u.t_a;
        tr.eta_solar[k] = u.eta_solar;
        tr.q_ac[k] = u.q_ac;
        tr.q_int[k] = u.q_int;
      }
    }
    const auto euler = simulate(model, traces, x0, t_s, n);
    const auto rk4 = oracles::rk4_simulate(model, input, x0, t_s, n);
    double dev = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < 2; ++j) {
        dev = std::max(dev, std::abs(euler.zones[j].t_z[k] -
                                     rk4[static_cast<std::size_t>(k)][j].t_z));
        dev = std::max(dev, std::abs((*euler.zones[j].t_w)[k] -
                                     rk4[static_cast<std::size_t>(k)][j].t_w));
      }
    }
    return dev;
  };

  const double coarse = max_deviation(0.05);
  const double fine = max_deviation(0.025);
  const double ratio = coarse / fine;
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);
}

TEST_CASE("simulation holds equilibrium inputs constant") {
  const ZoneParams p{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
  const auto model = make_building_model({p});
  const Eigen::Index n = 100;
  std::vector<ZoneInputTrace> traces(1);
  traces[0].t_a = Eigen::VectorXd::Constant(n, 21.0);
  traces[0].eta_solar = Eigen::VectorXd::Zero(n);
  traces[0].q_ac = Eigen::VectorXd::Zero(n);
  traces[0].q_int = Eigen::VectorXd::Zero(n);
  const std::vector<ZoneState> x0{{21.0, 21.0}};
  const auto out = simulate(model, traces, x0, 1.0 / 12, n);
  CHECK((out.zones[0].t_z.array() == 21.0).all());
  CHECK((out.zones[0].t_w->array() == 21.0).all());
}

TEST_CASE("cooling step decays monotonically to the analytic equilibrium") {
  // Freeze the wall with an enormous capacitance so the zone follows the
  // single-exponential solution of its own equation.
  const ZoneParams p{1.0, 0.5, 0.8, 1e12, 5.0, 0.0, 0.0};
  const auto model = make_building_model({p});
  const double t_s = 0.005;
  const Eigen::Index n = 1001;
  const double t_a = 20.0, t_w0 = 25.0, q_ac = 1.0, t_z0 = 25.0;
  std::vector<ZoneInputTrace> traces(1);
  traces[0].t_a = Eigen::VectorXd::Constant(n, t_a);
  traces[0].eta_solar = Eigen::VectorXd::Zero(n);
  traces[0].q_ac = Eigen::VectorXd::Constant(n, q_ac);
  traces[0].q_int = Eigen::VectorXd::Zero(n);
  const std::vector<ZoneState> x0{{t_z0, t_w0}};
  const auto out = simulate(model, traces, x0, t_s, n);

  const double a = 1.0 / (p.r_za * p.c_z) + 1.0 / (p.r_zw * p.c_z);
  const double b = t_a / (p.r_za * p.c_z) + t_w0 / (p.r_zw * p.c_z) - q_ac / p.c_z;
  const double t_inf = b / a;
  double max_err = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * t_s;
    const double analytic = t_inf + (t_z0 - t_inf) * std::exp(-a * t);
    max_err = std::max(max_err, std::abs(out.zones[0].t_z[k] - analytic));
  }
  CHECK(max_err < 0.02);

  for (Eigen::Index k = 1; k < n; ++k)
    CHECK(out.zones[0].t_z[k] <= out.zones[0].t_z[k - 1] + 1e-12);
  CHECK(out.zones[0].t_z.minCoeff() >= t_inf - 1e-9);
}

TEST_CASE("homogeneous zones with identical inputs stay identical") {
  const ZoneParams p{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
  const auto model = make_building_model(std::vector<ZoneParams>(5, p));
  const Eigen::Index n = 200;
  Eigen::VectorXd t_a(n), eta(n), q_ac(n), q_int(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / 12.0;
    t_a[k] = 25 + 5 * std::sin(t);
    eta[k] = 0.3 * (1 + std::sin(0.5 * t));
    q_ac[k] = k % 24 < 12 ? 1.0 : 0.0;
    q_int[k] = 0.4;
  }
  std::vector<ZoneInputTrace> traces(5, ZoneInputTrace{t_a, eta, q_ac, q_int});
  const std::vector<ZoneState> x0(5, ZoneState{24.0, 24.0});
  const auto out = simulate(model, traces, x0, 1.0 / 12, n);
  for (std::size_t j = 1; j < 5; ++j) {
    CHECK(out.zones[j].t_z == out.zones[0].t_z);
    CHECK(*out.zones[j].t_w == *out.zones[0].t_w);
  }
}

TEST_CASE("simulation rejects short input traces") {
  const ZoneParams p{1.0, 0.5, 0.8, 3.5, 5.0, 0.4, 15.0};
  const auto model = make_building_model({p});
  std::vector<ZoneInputTrace> traces(1);
  traces[0].t_a = Eigen::VectorXd::Zero(5);
  traces[0].eta_solar = Eigen::VectorXd::Zero(5);
  traces[0].q_ac = Eigen::VectorXd::Zero(5);
  traces[0].q_int = Eigen::VectorXd::Zero(5);
  const std::vector<ZoneState> x0{{21.0, 21.0}};
  CHECK_THROWS_AS(simulate(model, traces, x0, 1.0 / 12, 10), Error);
  traces[0].q_int = Eigen::VectorXd::Zero(4);  // ragged within one zone
  CHECK_THROWS_AS(simulate(model, traces, x0, 1.0 / 12, 4), Error);
}

TEST_CASE("derivatives superpose on the cooling and load channels") {
  oracles::TestRng rng(9);
  for (int i = 0; i < 20; ++i) {
    const ZoneParams p = random_params(rng);
    const ZoneState x{rng.uniform(15, 35), rng.uniform(15, 35)};
    ZoneInputs u{rng.uniform(0, 35), rng.uniform(0, 1), 0.0, rng.uniform(0, 2)};
    const double a = rng.uniform(0, 3), b = rng.uniform(0, 3);
    auto with_q_ac = [&](double q) {
      ZoneInputs v = u;
      v.q_ac = q;
      return zone_derivative(x, v, p).d_t_z;
    };
    const double lhs = with_q_ac(a + b) - with_q_ac(a);
    const double rhs = with_q_ac(b) - with_q_ac(0.0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}
