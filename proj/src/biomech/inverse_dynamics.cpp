#include "gaitvib/biomech/inverse_dynamics.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace gaitvib::biomech {

void JointTrajectory::validate() const {
  if (knee.size() != hip.size() || ankle.size() != hip.size())
    throw std::invalid_argument("joint trajectory: hip/knee/ankle lengths differ");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("joint trajectory: sample_rate must be > 0");
  for (const auto* series : {&hip, &knee, &ankle}) {
    for (double v : *series) {
      if (!(v >= kMinJointAngle && v <= kMaxJointAngle))
        throw std::invalid_argument("joint trajectory: angle " + std::to_string(v) +
                                    " deg outside physiological bounds");
    }
  }
}

GrfSeries BilateralGrf::total() const {
  GrfSeries t = left;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.vertical[i] = left.vertical[i] + right.vertical[i];
    t.anterior_posterior[i] = left.anterior_posterior[i] + right.anterior_posterior[i];
    t.stance_mask[i] = left.stance_mask[i] || right.stance_mask[i];
  }
  return t;
}

std::vector<double> second_derivative(const std::vector<double>& x, double sample_rate) {
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("second_derivative: need at least 3 samples");
  const double s2 = sample_rate * sample_rate;
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) * s2;
  if (n >= 4) {
    d[0] = (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) * s2;
    d[n - 1] = (2.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4]) * s2;
  } else {
    d[0] = d[1];
    d[2] = d[1];
  }
  return d;
}

namespace {

// Gaussian low-pass with edge reflection; sigma in samples, 0 = identity.
std::vector<double> gaussian_smooth(const std::vector<double>& x, double sigma) {
  if (!(sigma > 0.0)) return x;
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double norm = 0.0;
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const double v = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + half)] = v;
    norm += v;
  }
  auto at = [&](std::ptrdiff_t i) {
    // Odd reflection about the end samples keeps the local slope.
    if (i < 0) return 2.0 * x[0] - x[static_cast<std::size_t>(std::min(-i, n - 1))];
    if (i >= n)
      return 2.0 * x[static_cast<std::size_t>(n - 1)] -
             x[static_cast<std::size_t>(std::max<std::ptrdiff_t>(2 * (n - 1) - i, 0))];
    return x[static_cast<std::size_t>(i)];
  };
  std::vector<double> y(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k)
      acc += kernel[static_cast<std::size_t>(k + half)] * at(i + k);
    y[static_cast<std::size_t>(i)] = acc / norm;
  }
  return y;
}

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

struct Run {
  std::size_t begin;
  std::size_t end;  // inclusive
};

Run run_containing(const std::vector<bool>& mask, std::size_t i) {
  std::size_t b = i, e = i;
  while (b > 0 && mask[b - 1]) --b;
  while (e + 1 < mask.size() && mask[e + 1]) ++e;
  return {b, e};
}

enum class Incoming { Left, Right, Neither };

Incoming incoming_foot(const std::vector<bool>& sl, const std::vector<bool>& sr, std::size_t i) {
  const Run l = run_containing(sl, i);
  const Run r = run_containing(sr, i);
  if (l.begin != r.begin) return l.begin > r.begin ? Incoming::Left : Incoming::Right;
  if (l.end != r.end) return l.end > r.end ? Incoming::Left : Incoming::Right;
  return Incoming::Neither;
}

/// Double-support runs: maximal index ranges where both feet are in stance.
std::vector<Run> double_support_runs(const std::vector<bool>& sl, const std::vector<bool>& sr) {
  std::vector<Run> runs;
  const std::size_t n = sl.size();
  for (std::size_t i = 0; i < n;) {
    if (sl[i] && sr[i]) {
      std::size_t j = i;
      while (j + 1 < n && sl[j + 1] && sr[j + 1]) ++j;
      runs.push_back({i, j});
      i = j + 1;
    } else {
      ++i;
    }
  }
  return runs;
}

struct LegKinematics {
  std::vector<double> chain_height;  // hip above ankle, m
  std::vector<double> thigh_com_dx;  // COM position relative to the hip, m
  std::vector<double> thigh_com_dy;
  std::vector<double> shank_com_dx;
  std::vector<double> shank_com_dy;
};

// Smooth stand-in for max(sin x, 0) with value 0 at x = 0.
double smooth_positive_sin(double x, double eps) {
  const double s = std::sin(x);
  return 0.5 * (s + std::sqrt(s * s + eps * eps)) - 0.5 * eps;
}

LegKinematics leg_kinematics(const JointTrajectory& t, const Anthropometry& a,
                             const InverseDynamicsOptions& opts) {
  const RatioTable& r = opts.ratios;
  const std::size_t n = t.size();
  LegKinematics k;
  k.chain_height.resize(n);
  k.thigh_com_dx.resize(n);
  k.thigh_com_dy.resize(n);
  k.shank_com_dx.resize(n);
  k.shank_com_dy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double thigh = deg2rad(t.hip[i] - opts.pelvic_tilt);
    const double shank = deg2rad(t.hip[i] - opts.pelvic_tilt - t.knee[i]);
    const double knee_x = a.thigh_length * std::sin(thigh);
    const double knee_y = -a.thigh_length * std::cos(thigh);
    k.chain_height[i] = support_chain_height(t.hip[i], t.knee[i], t.ankle[i], a, opts);
    k.thigh_com_dx[i] = r.thigh.com * knee_x;
    k.thigh_com_dy[i] = r.thigh.com * knee_y;
    k.shank_com_dx[i] = knee_x + r.shank.com * a.shank_length * std::sin(shank);
    k.shank_com_dy[i] = knee_y - r.shank.com * a.shank_length * std::cos(shank);
  }
  return k;
}

// Heel-strike pulses at every stance onset inside the series, paid back
// through the load shares so their net impulse is zero.
void add_heel_strikes(BilateralGrf& out, const LoadShare& w, const Anthropometry& a, const HeelStrike& hs) {
  if (!(hs.mass_ratio > 0.0 && hs.velocity > 0.0 && hs.duration > 0.0 && hs.recovery > 0.0)) return;
  const std::size_t n = out.left.size();
  const double fs = out.left.sample_rate;
  const double impulse = hs.mass_ratio * a.body_mass * hs.velocity;
  std::vector<double> payback(n, 0.0);
  for (GrfSeries* s : {&out.left, &out.right}) {
    for (std::size_t b = 1; b < n; ++b) {
      if (!s->stance_mask[b] || s->stance_mask[b - 1]) continue;
      // Contact halfway between the last swing and first stance sample.
      const double tc = static_cast<double>(b) - 0.5;
      std::vector<double> pulse, back;
      for (std::size_t i = b; i < n; ++i) {
        const double tau = (static_cast<double>(i) - tc) / fs;
        if (tau >= hs.recovery && tau >= hs.duration) break;
        pulse.push_back(tau < hs.duration ? std::sin(std::numbers::pi * tau / hs.duration) : 0.0);
        back.push_back(tau < hs.recovery ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * tau / hs.recovery) : 0.0);
      }
      double sp = 0.0, sb = 0.0;
      for (double v : pulse) sp += v;
      for (double v : back) sb += v;
      if (!(sp > 0.0 && sb > 0.0)) continue;
      for (std::size_t k = 0; k < pulse.size(); ++k) {
        const std::size_t i = b + k;
        if (s->stance_mask[i]) s->vertical[i] += impulse * fs * (pulse[k] / sp);
        payback[i] += impulse * fs * (back[k] / sb);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (payback[i] == 0.0) continue;
    if (out.left.stance_mask[i]) out.left.vertical[i] -= w.left[i] * payback[i];
    if (out.right.stance_mask[i]) out.right.vertical[i] -= w.right[i] * payback[i];
  }
}

}  // namespace

double support_chain_height(double hip, double knee, double ankle, const Anthropometry& a,
                            const InverseDynamicsOptions& opts) {
  const double thigh = deg2rad(hip - opts.pelvic_tilt);
  const double shank = deg2rad(hip - opts.pelvic_tilt - knee);
  // Sole pitch relative to the floor, toe-up positive.
  const double pitch = shank + deg2rad(ankle);
  const FootGeometry& f = opts.foot;
  const double eps = f.rocker_smoothing;
  const double ankle_height = f.ankle_height_ratio * a.height * std::cos(pitch) +
                              f.heel_ratio * a.foot_length * smooth_positive_sin(pitch, eps) +
                              f.toe_ratio * a.foot_length * smooth_positive_sin(-pitch, eps);
  return a.thigh_length * std::cos(thigh) + a.shank_length * std::cos(shank) + ankle_height;
}

LoadShare load_share(const std::vector<bool>& sl, const std::vector<bool>& sr) {
  if (sl.size() != sr.size()) throw std::invalid_argument("load_share: mask lengths differ");
  const std::size_t n = sl.size();
  LoadShare w{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (sl[i] && !sr[i]) w.left[i] = 1.0;
    if (sr[i] && !sl[i]) w.right[i] = 1.0;
  }
  for (const Run& run : double_support_runs(sl, sr)) {
    const Incoming in = incoming_foot(sl, sr, run.begin);
    const double len = static_cast<double>(run.end - run.begin + 2);
    for (std::size_t i = run.begin; i <= run.end; ++i) {
      if (in == Incoming::Neither) {
        w.left[i] = w.right[i] = 0.5;
        continue;
      }
      const double s = static_cast<double>(i - run.begin + 1) / len;
      const double w_in = 0.5 - 0.5 * std::cos(std::numbers::pi * s);
      (in == Incoming::Left ? w.left[i] : w.right[i]) = w_in;
      (in == Incoming::Left ? w.right[i] : w.left[i]) = 1.0 - w_in;
    }
  }
  return w;
}

BilateralGrf inverse_dynamics(const JointTrajectory& left, const JointTrajectory& right,
                              const Anthropometry& a, const std::vector<bool>& stance_left,
                              const std::vector<bool>& stance_right,
                              const InverseDynamicsOptions& opts) {
  left.validate();
  right.validate();
  a.validate();
  const std::size_t n = left.size();
  if (n < 3) throw std::invalid_argument("inverse_dynamics: need at least 3 samples to differentiate");
  if (right.size() != n || stance_left.size() != n || stance_right.size() != n)
    throw std::invalid_argument("inverse_dynamics: trajectory and stance mask lengths differ");
  if (left.sample_rate != right.sample_rate || left.start_time != right.start_time)
    throw std::invalid_argument("inverse_dynamics: legs sampled on different time bases");

  const double fs = left.sample_rate;
  const double g = opts.gravity;
  const SegmentProperties seg = segment_properties(a, opts.ratios);
  const double trunk_mass = a.body_mass - 2.0 * seg.leg_mass();

  const LegKinematics kl = leg_kinematics(left, a, opts);
  const LegKinematics kr = leg_kinematics(right, a, opts);
  const LoadShare w = load_share(stance_left, stance_right);

  // Pelvis height above ankle level: the supporting chains weighted by load
  // share, so support hands over smoothly across double support.
  std::vector<double> pelvis(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double wsum = w.left[i] + w.right[i];
    pelvis[i] = wsum > 0.0
                    ? (w.left[i] * kl.chain_height[i] + w.right[i] * kr.chain_height[i]) / wsum
                    : 0.5 * (kl.chain_height[i] + kr.chain_height[i]);
  }
  pelvis = gaussian_smooth(pelvis, opts.pelvis_smoothing * fs);

  auto absolute = [&](const std::vector<double>& rel) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = pelvis[i] + rel[i];
    return y;
  };
  const auto pelvis_acc = second_derivative(pelvis, fs);
  struct LegAcc {
    std::vector<double> thigh_x, thigh_y, shank_x, shank_y;
  };
  auto leg_acc = [&](const LegKinematics& k) {
    return LegAcc{second_derivative(k.thigh_com_dx, fs), second_derivative(absolute(k.thigh_com_dy), fs),
                  second_derivative(k.shank_com_dx, fs), second_derivative(absolute(k.shank_com_dy), fs)};
  };
  const LegAcc acc_l = leg_acc(kl), acc_r = leg_acc(kr);

  auto make_series = [&](const std::vector<bool>& mask) {
    GrfSeries s;
    s.vertical.assign(n, 0.0);
    s.anterior_posterior.assign(n, 0.0);
    s.stance_mask = mask;
    s.sample_rate = fs;
    s.start_time = left.start_time;
    return s;
  };
  BilateralGrf out{make_series(stance_left), make_series(stance_right)};

  for (std::size_t i = 0; i < n; ++i) {
    // Newton terms (support force each body needs), x forward, y up.
    const double trunk_y = trunk_mass * (pelvis_acc[i] + g);
    auto thigh_term = [&](const LegAcc& la, bool vertical) {
      return vertical ? seg.thigh.mass * (la.thigh_y[i] + g) : seg.thigh.mass * la.thigh_x[i];
    };
    auto shank_term = [&](const LegAcc& la, bool vertical) {
      return vertical ? seg.shank.mass * (la.shank_y[i] + g) : seg.shank.mass * la.shank_x[i];
    };
    const double foot_y = seg.foot.mass * g;
    const double leg_lx = thigh_term(acc_l, false) + shank_term(acc_l, false);
    const double leg_ly = thigh_term(acc_l, true) + shank_term(acc_l, true) + foot_y;
    const double leg_rx = thigh_term(acc_r, false) + shank_term(acc_r, false);
    const double leg_ry = thigh_term(acc_r, true) + shank_term(acc_r, true) + foot_y;
    const double total_x = leg_lx + leg_rx;
    const double total_y = trunk_y + leg_ly + leg_ry;

    auto stance_leg = [&](GrfSeries& s, const LegAcc& la, double share, double own_x, double own_y) {
      if (!s.stance_mask[i]) return;
      // Hip joint load on this leg, then down the chain.
      double fx = share * total_x - own_x;
      double fy = share * total_y - own_y;
      fx += thigh_term(la, false);
      fy += thigh_term(la, true);
      fx += shank_term(la, false);
      fy += shank_term(la, true);
      fy += foot_y;
      s.vertical[i] = fy;
      s.anterior_posterior[i] = fx;
    };
    stance_leg(out.left, acc_l, w.left[i], leg_lx, leg_ly);
    stance_leg(out.right, acc_r, w.right[i], leg_rx, leg_ry);
  }
  add_heel_strikes(out, w, a, opts.heel_strike);
  return out;
}

GrfSeries inverse_dynamics(const JointTrajectory& traj, const Anthropometry& a,
                           const std::vector<bool>& stance_mask, const InverseDynamicsOptions& opts) {
  return inverse_dynamics(traj, traj, a, stance_mask, stance_mask, opts).total();
}

}  // namespace gaitvib::biomech
