#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gaitvib/core/error.hpp"
#include "gaitvib/core/modal.hpp"
#include "gaitvib/core/param_store.hpp"
#include "gaitvib/core/rng.hpp"
#include "gaitvib/core/tape.hpp"
#include "support/fd_oracle.hpp"

using namespace gaitvib;
using namespace gaitvib::num;

namespace {

// in(2) -> tanh(4) -> tanh(4) -> out(1): 8+4 + 16+4 + 4+1 = 37 parameters.
ParamStore two_layer_net(std::uint64_t seed) {
  ParamStore p(seed);
  p.add("W1", {4, 2});
  p.add("b1", {4, 1}, Init::Small);
  p.add("W2", {4, 4});
  p.add("b2", {4, 1}, Init::Small);
  p.add("W3", {1, 4});
  p.add("b3", {1, 1}, Init::Small);
  return p;
}

Var two_layer_loss(Tape& t, std::span<const double> x) {
  Var in = t.constant(x);
  Var h1 = t.tanh(t.matmul(t.param("W1"), in) + t.param("b1"));
  Var h2 = t.tanh(t.matmul(t.param("W2"), h1) + t.param("b2"));
  Var y = t.matmul(t.param("W3"), h2) + t.param("b3");
  return y * y;
}

double two_layer_value(const ParamStore& p, std::span<const double> x) {
  Tape t(p);
  return t.item(two_layer_loss(t, x));
}

}  // namespace

TEST_CASE("ParamStore slices are disjoint and cover the vector") {
  ParamStore p(7);
  p.add("a", {3, 2});
  p.add("b", {4, 1}, Init::Zeros);
  p.add("c", {1, 1}, Init::Ones);
  CHECK(p.size() == 11);
  std::size_t covered = 0;
  for (const auto& name : p.names_by_offset()) {
    CHECK(p.slice(name).offset == covered);
    covered += p.slice(name).shape.size();
  }
  CHECK(covered == p.size());
  CHECK(p.view("c")[0] == 1.0);
  CHECK_THROWS_AS(p.add("a", {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(p.slice("missing"), std::out_of_range);
}

TEST_CASE("grad of x*x at 3 is 6") {
  ParamStore p;
  p.add("x", {1, 1}, Init::Zeros);
  p.view("x")[0] = 3.0;
  auto g = grad([](Tape& t) { return t.param("x") * t.param("x"); }, p);
  CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("grad of sin(x) at 0 is 1") {
  ParamStore p;
  p.add("x", {1, 1}, Init::Zeros);
  auto g = grad([](Tape& t) { return t.sin(t.param("x")); }, p);
  CHECK(g[0] == 1.0);
}

TEST_CASE("37-parameter tanh network matches central differences") {
  ParamStore p = two_layer_net(11);
  REQUIRE(p.size() == 37);
  const std::vector<double> x{0.3, -0.7};
  auto g = grad([&](Tape& t) { return two_layer_loss(t, x); }, p);
  auto fd = testing::central_differences([&](const ParamStore& q) { return two_layer_value(q, x); }, p);
  CHECK(testing::max_relative_error(g, fd) < 1e-4);
}

TEST_CASE("every primitive matches central differences at 100 random points") {
  // Composite touching add, sub, mul, matmul, tanh, sigmoid, sin, cos, exp,
  // sum, softmax, concat, slice and sum_n.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 0.8);
  auto objective = [](Tape& t) {
    Var a = t.param("a");  // 3x1
    Var W = t.param("W");  // 3x3
    Var s = t.softmax(t.matmul(W, a));
    Var u = t.sin(a) * t.cos(t.scale(a, 0.5)) - t.sigmoid(a);
    Var e = t.exp(t.scale(t.tanh(u), 0.3));
    Var parts[] = {s, u, e};
    Var cat = t.concat(parts);
    Var head = t.slice(cat, 2, 5);
    Var stacked[] = {t.slice(cat, 0, 3), t.slice(cat, 3, 3), t.slice(cat, 6, 3)};
    Var mixed = t.sum_n(stacked);
    return t.sum(head * head) + t.mean(mixed * s) + t.sum(t.slice(a, 0, 1) * mixed);
  };
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ParamStore p;
    p.add("a", {3, 1}, Init::Zeros);
    p.add("W", {3, 3}, Init::Zeros);
    for (auto& v : p.values()) v = nd(rng);
    auto g = grad(objective, p);
    auto fd = testing::central_differences(
        [&](const ParamStore& q) {
          Tape t(q);
          return t.item(objective(t));
        },
        p);
    worst = std::max(worst, testing::max_relative_error(g, fd));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("backward visits shared parameters once per use") {
  ParamStore p;
  p.add("w", {2, 1}, Init::Zeros);
  p.view("w")[0] = 2.0;
  p.view("w")[1] = -1.0;
  // f = sum(w * w * w) -> df/dw = 3 w^2
  auto g = grad([](Tape& t) { return t.sum(t.param("w") * t.param("w") * t.param("w")); }, p);
  CHECK(g[0] == doctest::Approx(12.0));
  CHECK(g[1] == doctest::Approx(3.0));
}

TEST_CASE("sum_n is exactly permutation invariant") {
  ParamStore p;
  Tape t(p);
  const std::vector<double> a{1e16, 0.1}, b{1.0, 0.2}, c{-1e16, 0.3}, d{3.5, 1e-17};
  Var va = t.constant(a), vb = t.constant(b), vc = t.constant(c), vd = t.constant(d);
  Var x[] = {va, vb, vc, vd};
  Var y[] = {vc, va, vd, vb};
  auto s1 = t.value(t.sum_n(x));
  auto s2 = t.value(t.sum_n(y));
  CHECK(s1[0] == s2[0]);
  CHECK(s1[1] == s2[1]);
}

TEST_CASE("non-finite intermediates name the tape node") {
  ParamStore p;
  p.add("x", {1, 1}, Init::Zeros);
  p.view("x")[0] = 800.0;
  try {
    (void)grad([](Tape& t) { return t.exp(t.param("x")); }, p);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("tape node 1 (exp)") != std::string::npos);
  }
}

TEST_CASE("integrate_modal: zero force and rest state stay at rest") {
  ModalOscillator osc{2000.0, 0.05, 12.0};
  std::vector<double> f(500, 0.0);
  auto r = integrate_modal(osc, f, 2e-3);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(r.displacement[i] == 0.0);
    CHECK(r.velocity[i] == 0.0);
    CHECK(r.acceleration[i] == 0.0);
  }
}

TEST_CASE("integrate_modal: undamped limit matches cos(2 pi f t)") {
  ModalOscillator osc{1.0, 1e-9, 5.0};
  const double dt = 1e-3;
  std::vector<double> f(2000, 0.0);
  auto r = integrate_modal(osc, f, dt, 1.0, 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double t = dt * static_cast<double>(i);
    worst = std::max(worst, std::abs(r.displacement[i] - std::cos(2.0 * std::numbers::pi * 5.0 * t)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("integrate_modal: damped free vibration matches the closed form") {
  ModalOscillator osc{3.0, 0.05, 12.0};
  const double dt = 2e-3;
  const double wn = osc.omega();
  const double wd = wn * std::sqrt(1.0 - 0.05 * 0.05);
  std::vector<double> f(1000, 0.0);
  auto r = integrate_modal(osc, f, dt, 0.01, 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double t = dt * static_cast<double>(i);
    const double exact =
        0.01 * std::exp(-0.05 * wn * t) * (std::cos(wd * t) + 0.05 * wn / wd * std::sin(wd * t));
    worst = std::max(worst, std::abs(r.displacement[i] - exact));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("integrate_modal: impulse response peaks at the analytic time") {
  ModalOscillator osc{10.0, 0.05, 8.0};
  const double dt = 1e-3;
  std::vector<double> f(1000, 0.0);
  f[0] = 1.0 / dt;
  auto r = integrate_modal(osc, f, dt);
  const double wn = osc.omega();
  const double wd = wn * std::sqrt(1.0 - 0.05 * 0.05);
  // h(t) = exp(-z wn t) sin(wd t) / (m wd) peaks where tan(wd t) = wd / (z wn).
  const double t_peak = std::atan2(wd, 0.05 * wn) / wd;
  std::size_t imax = 0;
  for (std::size_t i = 1; i < f.size() / 2; ++i)
    if (r.displacement[i] > r.displacement[imax]) imax = i;
  CHECK(std::abs(static_cast<double>(imax) * dt - t_peak) <= dt);
}

TEST_CASE("integrate_modal is linear in the forcing") {
  ModalOscillator osc{2000.0, 0.05, 12.0};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 500.0);
  std::vector<double> f1(800), f2(800), mix(800);
  for (auto& v : f1) v = nd(rng);
  for (auto& v : f2) v = nd(rng);
  const double a = 1.7, b = -0.4;
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * f1[i] + b * f2[i];
  auto r1 = integrate_modal(osc, f1, 2e-3);
  auto r2 = integrate_modal(osc, f2, 2e-3);
  auto rm = integrate_modal(osc, mix, 2e-3);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    CHECK(std::abs(rm.displacement[i] - (a * r1.displacement[i] + b * r2.displacement[i])) < 1e-10);
    CHECK(std::abs(rm.velocity[i] - (a * r1.velocity[i] + b * r2.velocity[i])) < 1e-10);
  }
}

TEST_CASE("integrate_modal stays bounded for bounded input over 1e5 steps") {
  ModalOscillator osc{1.0, 0.01, 9.0};
  std::vector<double> f(100000);
  std::mt19937_64 rng(9);
  for (auto& v : f) v = 2.0 * uniform01(rng) - 1.0;
  auto r = integrate_modal(osc, f, 1e-2);
  // Static bound scaled by the resonant amplification 1/(2 zeta).
  const double bound = 1.0 / osc.stiffness() / (2.0 * osc.damping_ratio) * 50.0;
  double peak = 0.0;
  for (double u : r.displacement) peak = std::max(peak, std::abs(u));
  CHECK(std::isfinite(peak));
  CHECK(peak < bound);
}

TEST_CASE("integrate_modal rejects coarse time steps") {
  ModalOscillator osc{1.0, 0.05, 20.0};
  std::vector<double> f(10, 0.0);
  CHECK_THROWS_AS(integrate_modal(osc, f, 0.01), DataError);
  CHECK_THROWS_AS(integrate_modal(osc, f, 0.0), DataError);
  CHECK_NOTHROW(integrate_modal(osc, f, 0.005));
}
