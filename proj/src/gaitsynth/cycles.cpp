#include "gaitvib/gaitsynth/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaitvib/core/error.hpp"

namespace gaitvib::gaitsynth {

std::string_view to_string(GaitEvent e) noexcept {
  switch (e) {
    case GaitEvent::FootStrike: return "foot_strike";
    case GaitEvent::LoadingResponse: return "loading_response";
    case GaitEvent::FootOff: return "foot_off";
    case GaitEvent::MidSwing: return "mid_swing";
  }
  return "?";
}

std::vector<GaitCycle> extract_cycles(const GaitEvents& events, Foot foot, std::uint64_t trial_id) {
  const auto& s = events.foot_strike_times;
  const auto& o = events.foot_off_times;
  const std::string who = "foot " + std::string(to_string(foot));
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1]))
      throw DataError(who + ": foot strikes not increasing at index " + std::to_string(i));
  for (std::size_t i = 1; i < o.size(); ++i)
    if (!(o[i] > o[i - 1]))
      throw DataError(who + ": foot offs not increasing at index " + std::to_string(i));
  if (!o.empty() && (s.empty() || o.front() <= s.front()))
    throw DataError(who + ": foot off 0 precedes the first foot strike");

  std::vector<GaitCycle> cycles;
  std::size_t k = 0;  // next unmatched off
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    std::size_t count = 0;
    double off = 0.0;
    while (k < o.size() && o[k] < s[i + 1]) {
      if (o[k] > s[i]) {
        off = o[k];
        ++count;
      }
      ++k;
    }
    if (count != 1)
      throw DataError(who + ": strike pair " + std::to_string(i) + " contains " +
                      std::to_string(count) + " foot offs, expected 1");
    cycles.push_back({s[i], s[i + 1], off, trial_id, foot});
  }
  // At most one off may trail the last strike.
  std::size_t trailing = 0;
  for (; k < o.size(); ++k)
    if (!s.empty() && o[k] > s.back()) ++trailing;
  if (trailing > 1)
    throw DataError(who + ": " + std::to_string(trailing) + " foot offs after the last strike (index " +
                    std::to_string(s.empty() ? 0 : s.size() - 1) + ")");
  return cycles;
}

std::vector<GaitCycle> extract_cycles(const BilateralEvents& events, std::uint64_t trial_id) {
  auto cycles = extract_cycles(events.left, Foot::Left, trial_id);
  auto right = extract_cycles(events.right, Foot::Right, trial_id);
  cycles.insert(cycles.end(), right.begin(), right.end());
  return cycles;
}

bool seeks_maximum(Joint j, GaitEvent e) noexcept {
  if (j == Joint::Ankle && e == GaitEvent::LoadingResponse) return false;
  return true;
}

double interpolate_cubic(const std::vector<double>& x, double sample_rate, double start_time, double t) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const double u = (t - start_time) * sample_rate;
  if (n == 1) return x[0];
  auto i0 = static_cast<std::ptrdiff_t>(std::floor(u));
  i0 = std::clamp<std::ptrdiff_t>(i0, 0, n - 2);
  if (n < 4) {
    const double f = u - static_cast<double>(i0);
    return x[static_cast<std::size_t>(i0)] * (1.0 - f) + x[static_cast<std::size_t>(i0 + 1)] * f;
  }
  const std::ptrdiff_t b = std::clamp<std::ptrdiff_t>(i0 - 1, 0, n - 4);
  const double f = u - static_cast<double>(b);  // position within nodes b..b+3 as 0..3
  double v = 0.0;
  for (int a = 0; a < 4; ++a) {
    double w = 1.0;
    for (int c = 0; c < 4; ++c)
      if (c != a) w *= (f - c) / static_cast<double>(a - c);
    v += w * x[static_cast<std::size_t>(b + a)];
  }
  return v;
}

namespace {

// Extremum of the interpolated series over [ta, tb]: window end values plus a
// parabolic vertex at every interior sample that is a local extremum.
double window_extremum(const std::vector<double>& x, double fs, double t0, double ta, double tb,
                       bool maximum) {
  const double sign = maximum ? 1.0 : -1.0;
  double best = sign * interpolate_cubic(x, fs, t0, ta);
  best = std::max(best, sign * interpolate_cubic(x, fs, t0, tb));
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto first = static_cast<std::ptrdiff_t>(std::ceil((ta - t0) * fs));
  const auto last = static_cast<std::ptrdiff_t>(std::floor((tb - t0) * fs));
  for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(first, 1); i <= std::min(last, n - 2); ++i) {
    const double ym = sign * x[static_cast<std::size_t>(i - 1)];
    const double y0 = sign * x[static_cast<std::size_t>(i)];
    const double yp = sign * x[static_cast<std::size_t>(i + 1)];
    if (!(y0 >= ym && y0 >= yp)) continue;
    const double curv = ym - 2.0 * y0 + yp;
    double peak = y0;
    if (curv < 0.0) {
      const double d = std::clamp(0.5 * (ym - yp) / curv, -0.5, 0.5);
      const double td = t0 + (static_cast<double>(i) + d) / fs;
      if (td >= ta && td <= tb) peak = y0 - 0.25 * (ym - yp) * d;
    }
    best = std::max(best, peak);
  }
  return sign * best;
}

}  // namespace

TargetAngles extract_targets(const biomech::JointTrajectory& traj, const GaitCycle& cycle) {
  if (traj.size() < 2) throw DataError("extract_targets: trajectory has fewer than 2 samples");
  const double fs = traj.sample_rate;
  const double t_first = traj.start_time;
  const double t_last = traj.time(traj.size() - 1);
  const double tol = 1e-9;
  if (cycle.start < t_first - tol || cycle.end > t_last + tol)
    throw DataError("extract_targets: cycle [" + std::to_string(cycle.start) + ", " +
                    std::to_string(cycle.end) + "] s outside trajectory span [" +
                    std::to_string(t_first) + ", " + std::to_string(t_last) + "] s");
  if (!(cycle.start < cycle.foot_off && cycle.foot_off < cycle.end))
    throw DataError("extract_targets: foot off outside its cycle");

  const double stance = cycle.foot_off - cycle.start;
  const double swing = cycle.end - cycle.foot_off;
  TargetAngles out;
  for (Joint j : kJoints) {
    const auto& x = j == Joint::Hip ? traj.hip : j == Joint::Knee ? traj.knee : traj.ankle;
    out[target_index(j, GaitEvent::FootStrike)] = interpolate_cubic(x, fs, t_first, cycle.start);
    out[target_index(j, GaitEvent::FootOff)] = interpolate_cubic(x, fs, t_first, cycle.foot_off);
    out[target_index(j, GaitEvent::LoadingResponse)] =
        window_extremum(x, fs, t_first, cycle.start, cycle.start + kLoadingWindow * stance,
                        seeks_maximum(j, GaitEvent::LoadingResponse));
    out[target_index(j, GaitEvent::MidSwing)] =
        window_extremum(x, fs, t_first, cycle.foot_off + kMidSwingBegin * swing,
                        cycle.foot_off + kMidSwingEnd * swing, seeks_maximum(j, GaitEvent::MidSwing));
  }
  return out;
}

}  // namespace gaitvib::gaitsynth
