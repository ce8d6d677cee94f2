#include "gaitvib/floorsim/floor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "gaitvib/core/error.hpp"

namespace gaitvib::floorsim {

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

void FloorModel::validate() const {
  if (modes.empty()) throw std::invalid_argument("floor model needs at least one mode");
  for (const auto& m : modes) m.validate();
  if (sensor_positions.empty()) throw std::invalid_argument("floor model needs at least one sensor");
  for (std::size_t i = 0; i < sensor_positions.size(); ++i)
    for (std::size_t j = i + 1; j < sensor_positions.size(); ++j)
      if (sensor_positions[i].x == sensor_positions[j].x && sensor_positions[i].y == sensor_positions[j].y)
        throw std::invalid_argument("sensors " + std::to_string(i) + " and " + std::to_string(j) +
                                    " share a position");
  if (!(attenuation_alpha >= 0.0)) throw std::invalid_argument("attenuation must be non-negative");
  if (!(wave_speed > 0.0)) throw std::invalid_argument("wave speed must be positive");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise std must be non-negative");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
}

Point FloorModel::min_corner() const {
  Point p = sensor_positions.front();
  for (const auto& s : sensor_positions) p = {std::min(p.x, s.x), std::min(p.y, s.y)};
  return p;
}

Point FloorModel::max_corner() const {
  Point p = sensor_positions.front();
  for (const auto& s : sensor_positions) p = {std::max(p.x, s.x), std::max(p.y, s.y)};
  return p;
}

std::vector<double> resample_linear(std::span<const double> x, double rate_in, double t_in,
                                    double rate_out, double t_out, std::size_t n) {
  std::vector<double> y(n, 0.0);
  if (x.empty()) return y;
  const double last = static_cast<double>(x.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (t_out + static_cast<double>(i) / rate_out - t_in) * rate_in;
    if (u < -1e-9 || u > last + 1e-9) continue;
    const double uc = std::clamp(u, 0.0, last);
    const auto k = std::min(static_cast<std::size_t>(uc), x.size() - 1);
    const double f = uc - static_cast<double>(k);
    y[i] = k + 1 < x.size() ? x[k] * (1.0 - f) + x[k + 1] * f : x[k];
  }
  return y;
}

SensorVelocities simulate_vibration(std::span<const Footfall> footfalls, const FloorModel& floor,
                                    double start_time, std::size_t samples, std::uint64_t seed) {
  floor.validate();
  if (samples == 0) throw DataError("simulate_vibration: empty output span");
  if (footfalls.empty()) throw DataError("simulate_vibration: no footfalls");
  const Point lo = floor.min_corner(), hi = floor.max_corner();
  for (std::size_t k = 0; k < footfalls.size(); ++k) {
    const Footfall& f = footfalls[k];
    if (f.force.empty()) throw DataError("simulate_vibration: footfall " + std::to_string(k) + " has no force samples");
    for (double v : f.force)
      if (!std::isfinite(v))
        throw DataError("simulate_vibration: non-finite force in footfall " + std::to_string(k));
    if (f.position.x < lo.x || f.position.x > hi.x || f.position.y < lo.y || f.position.y > hi.y)
      throw DataError("simulate_vibration: footfall " + std::to_string(k) + " outside the sensor area");
  }

  const double fs = floor.sample_rate;
  std::vector<std::vector<double>> forces;
  forces.reserve(footfalls.size());
  for (const Footfall& f : footfalls)
    forces.push_back(resample_linear(f.force, f.sample_rate, f.start_time, fs, start_time, samples));

  SensorVelocities out;
  out.sample_rate = fs;
  out.start_time = start_time;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const Point& s : floor.sensor_positions) {
    std::vector<double> drive(samples, 0.0);
    for (std::size_t k = 0; k < footfalls.size(); ++k) {
      const double d = distance(s, footfalls[k].position);
      const double w = std::exp(-floor.attenuation_alpha * d);
      const auto delay = static_cast<std::size_t>(std::llround(d / floor.wave_speed * fs));
      for (std::size_t i = delay; i < samples; ++i) drive[i] += w * forces[k][i - delay];
    }
    std::vector<double> v(samples, 0.0);
    for (const auto& mode : floor.modes) {
      const auto r = num::integrate_modal(mode, drive, 1.0 / fs);
      for (std::size_t i = 0; i < samples; ++i) v[i] += r.velocity[i];
    }
    if (floor.noise_std > 0.0)
      for (double& x : v) x += floor.noise_std * noise(rng);
    out.velocity.push_back(std::move(v));
  }
  return out;
}

std::vector<double> geophone_transduce(std::span<const double> velocity, double sample_rate,
                                       const Geophone& g) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("geophone: sample rate must be positive");
  if (!(g.corner_frequency > 0.0 && g.corner_frequency < 0.5 * sample_rate))
    throw std::invalid_argument("geophone: corner frequency " + std::to_string(g.corner_frequency) +
                                " Hz must lie in (0, Nyquist)");
  const double k = 2.0 * sample_rate;
  const double wc = k * std::tan(std::numbers::pi * g.corner_frequency / sample_rate);
  const double b = k / (k + wc);
  const double a = (k - wc) / (k + wc);
  const double scale = g.sensitivity * g.gain;
  std::vector<double> y(velocity.size());
  double prev_x = 0.0, prev_y = 0.0;
  for (std::size_t i = 0; i < velocity.size(); ++i) {
    const double yi = b * (velocity[i] - prev_x) + a * prev_y;
    prev_x = velocity[i];
    prev_y = yi;
    y[i] = scale * yi;
  }
  return y;
}

VibrationRecord geophone_transduce(const SensorVelocities& v, const Geophone& g) {
  VibrationRecord r;
  r.sample_rate = v.sample_rate;
  r.start_time = v.start_time;
  r.gain = g.gain;
  r.sensitivity = g.sensitivity;
  for (const auto& s : v.velocity) r.signals.push_back(geophone_transduce(s, v.sample_rate, g));
  return r;
}

}  // namespace gaitvib::floorsim
