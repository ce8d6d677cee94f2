#pragma once

#include <span>
#include <vector>

namespace gaitvib::num {

/// Single-degree-of-freedom modal oscillator m*u'' + c*u' + k*u = F with
/// c = 2*zeta*wn*m and k = wn^2*m, wn = 2*pi*natural_frequency.
struct ModalOscillator {
  double modal_mass = 2000.0;       // kg
  double damping_ratio = 0.05;      // (0, 1)
  double natural_frequency = 12.0;  // Hz

  /// Throws std::invalid_argument unless all fields are positive and zeta < 1.
  void validate() const;
  double omega() const;
  double stiffness() const;
  double damping() const;
};

struct ModalResponse {
  std::vector<double> displacement;  // m
  std::vector<double> velocity;      // m/s
  std::vector<double> acceleration;  // m/s^2
};

/// Newmark average-acceleration integration (beta = 1/4, gamma = 1/2) of the
/// oscillator under force samples F[0..N). The scheme is driven with
/// pole-matched damping and stiffness so its discrete free response has
/// exactly the physical decay rate and damped frequency; the unmodified
/// scheme lags by (wn*dt)^2/12 of a period per cycle.
///
/// Requires dt > 0 and dt <= 0.1 / natural_frequency, otherwise throws
/// DataError ("resolution").
ModalResponse integrate_modal(const ModalOscillator& osc, std::span<const double> force, double dt,
                              double u0 = 0.0, double v0 = 0.0);

}  // namespace gaitvib::num
