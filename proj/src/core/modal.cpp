#include "gaitvib/core/modal.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gaitvib/core/error.hpp"

namespace gaitvib::num {

void ModalOscillator::validate() const {
  if (!(modal_mass > 0.0)) throw std::invalid_argument("modal_mass must be positive");
  if (!(natural_frequency > 0.0)) throw std::invalid_argument("natural_frequency must be positive");
  if (!(damping_ratio > 0.0 && damping_ratio < 1.0))
    throw std::invalid_argument("damping_ratio must lie in (0, 1)");
}

double ModalOscillator::omega() const { return 2.0 * std::numbers::pi * natural_frequency; }
double ModalOscillator::stiffness() const { return omega() * omega() * modal_mass; }
double ModalOscillator::damping() const { return 2.0 * damping_ratio * omega() * modal_mass; }

ModalResponse integrate_modal(const ModalOscillator& osc, std::span<const double> force, double dt,
                              double u0, double v0) {
  osc.validate();
  if (!(dt > 0.0) || dt > 0.1 / osc.natural_frequency) {
    throw DataError("integrate_modal: resolution guard violated (dt=" + std::to_string(dt) +
                    " s, need 0 < dt <= " + std::to_string(0.1 / osc.natural_frequency) + " s)");
  }

  // Trapezoidal integration maps a continuous pole s' to (1 + s'dt/2)/(1 - s'dt/2).
  // Choosing s' = (2/dt) tanh(s dt/2) makes that map land on exp(s dt).
  const double wn = osc.omega();
  const double zeta = osc.damping_ratio;
  const std::complex<double> s(-zeta * wn, wn * std::sqrt(1.0 - zeta * zeta));
  const std::complex<double> sp = (2.0 / dt) * std::tanh(s * (dt / 2.0));
  const double wn_eff = std::abs(sp);
  const double m = osc.modal_mass;
  const double c = -2.0 * sp.real() * m;
  const double k = wn_eff * wn_eff * m;

  constexpr double beta = 0.25;
  constexpr double gamma = 0.5;
  const std::size_t n = force.size();
  ModalResponse r;
  r.displacement.resize(n);
  r.velocity.resize(n);
  r.acceleration.resize(n);
  if (n == 0) return r;

  auto& u = r.displacement;
  auto& v = r.velocity;
  auto& a = r.acceleration;
  u[0] = u0;
  v[0] = v0;
  a[0] = (force[0] - c * v0 - k * u0) / m;

  const double a0 = 1.0 / (beta * dt * dt);
  const double a1 = gamma / (beta * dt);
  const double a2 = 1.0 / (beta * dt);
  const double a3 = 1.0 / (2.0 * beta) - 1.0;
  const double a4 = gamma / beta - 1.0;
  const double a5 = dt * (gamma / (2.0 * beta) - 1.0);
  const double k_eff = k + a0 * m + a1 * c;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double p = force[i + 1] + m * (a0 * u[i] + a2 * v[i] + a3 * a[i]) +
                     c * (a1 * u[i] + a4 * v[i] + a5 * a[i]);
    u[i + 1] = p / k_eff;
    a[i + 1] = a0 * (u[i + 1] - u[i]) - a2 * v[i] - a3 * a[i];
    v[i + 1] = v[i] + dt * ((1.0 - gamma) * a[i] + gamma * a[i + 1]);
  }
  return r;
}

}  // namespace gaitvib::num
