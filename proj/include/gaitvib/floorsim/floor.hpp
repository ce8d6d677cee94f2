#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gaitvib/core/modal.hpp"

namespace gaitvib::floorsim {

struct Point {
  double x = 0.0;  // m, along the walkway
  double y = 0.0;  // m, across
};
double distance(Point a, Point b) noexcept;

struct FloorModel {
  std::vector<num::ModalOscillator> modes{num::ModalOscillator{}};
  double attenuation_alpha = 0.3;  // 1/m
  double wave_speed = 200.0;       // m/s
  std::vector<Point> sensor_positions{{0.0, -1.0}, {0.0, 1.0}, {4.0, -1.0}, {4.0, 1.0}};
  double noise_std = 1e-5;         // m/s, white noise on sensor velocity (about 20 dB SNR)
  double sample_rate = 500.0;      // Hz

  /// Throws std::invalid_argument: no mode or sensor, duplicate sensors,
  /// negative attenuation or noise, non-positive wave speed or sample rate.
  void validate() const;
  /// Bounding box of the sensors; footfalls must lie inside it.
  Point min_corner() const;
  Point max_corner() const;
};

/// Vertical force of one footfall at a fixed floor position, N.
struct Footfall {
  std::vector<double> force;
  double sample_rate = 100.0;
  double start_time = 0.0;  // s, time of force[0]
  Point position;
};

/// Floor velocity at every sensor, m/s, on a common uniform grid.
struct SensorVelocities {
  std::vector<std::vector<double>> velocity;  // [sensor][sample]
  double sample_rate = 500.0;
  double start_time = 0.0;

  std::size_t samples() const noexcept { return velocity.empty() ? 0 : velocity.front().size(); }
};

/// Linear resampling of a uniformly sampled series onto `n` samples at
/// `rate_out` starting at `t_out`; zero outside the input span.
std::vector<double> resample_linear(std::span<const double> x, double rate_in, double t_in,
                                    double rate_out, double t_out, std::size_t n);

/// Superposes every footfall's force at each sensor, attenuated by
/// exp(-alpha d) and delayed by round(d / wave_speed * fs) samples, drives
/// each mode with it, and sums the modal velocities. Output spans
/// [start_time, start_time + (samples - 1) / fs]. White Gaussian noise of
/// noise_std is added per sensor from `seed`.
///
/// Throws DataError for an empty output span, no footfalls, non-finite
/// forces or footfalls outside the sensor bounds.
SensorVelocities simulate_vibration(std::span<const Footfall> footfalls, const FloorModel& floor,
                                    double start_time, std::size_t samples, std::uint64_t seed);

struct Geophone {
  double sensitivity = 28.8;       // V/(m/s)
  double gain = 500.0;
  double corner_frequency = 10.0;  // Hz
};

/// First-order high-pass (bilinear transform, corner prewarped) followed by
/// sensitivity and gain. Throws std::invalid_argument if the corner is not
/// in (0, fs/2).
std::vector<double> geophone_transduce(std::span<const double> velocity, double sample_rate,
                                       const Geophone& geophone = {});

/// Sensor voltages after amplification.
struct VibrationRecord {
  std::vector<std::vector<double>> signals;  // [sensor][sample], V
  double sample_rate = 500.0;
  double start_time = 0.0;
  double gain = 500.0;
  double sensitivity = 28.8;

  std::size_t sensors() const noexcept { return signals.size(); }
  std::size_t samples() const noexcept { return signals.empty() ? 0 : signals.front().size(); }

  bool operator==(const VibrationRecord&) const = default;
};

VibrationRecord geophone_transduce(const SensorVelocities& v, const Geophone& geophone = {});

}  // namespace gaitvib::floorsim
