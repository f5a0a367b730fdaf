#include "semiadapt/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semiadapt/errors.hpp"
#include "semiadapt/rng.hpp"

namespace semiadapt {

namespace {

void check_common(double dt, double noise_halfwidth, int trials) {
  if (dt <= 0.0) throw ConfigError("generator dt must be > 0");
  if (noise_halfwidth < 0.0) throw ConfigError("generator noise_halfwidth must be >= 0");
  if (trials < 1) throw ConfigError("generator trials must be >= 1");
}

}  // namespace

std::vector<Trajectory> gen_tv(const TvParams& p) {
  check_common(p.dt, p.noise_halfwidth, p.trials);
  if (p.duration < 0.0) throw ConfigError("tv duration must be >= 0");

  const int steps = static_cast<int>(std::llround(p.duration / p.dt)) + 1;
  std::vector<Trajectory> out;
  out.reserve(p.trials);
  for (int trial = 0; trial < p.trials; ++trial) {
    Rng rng(p.seed + static_cast<std::uint64_t>(trial));
    Trajectory traj;
    traj.action_label = p.action_label;
    traj.timestamps.reserve(steps);
    traj.positions.reserve(steps);
    const double trial_offset =
        (p.per_trial_noise && p.noise_halfwidth > 0.0)
            ? rng.uniform(-p.noise_halfwidth, p.noise_halfwidth)
            : 0.0;
    for (int j = 0; j < steps; ++j) {
      const double t = j * p.dt;
      const double w = (!p.per_trial_noise && p.noise_halfwidth > 0.0)
                           ? rng.uniform(-p.noise_halfwidth, p.noise_halfwidth)
                           : trial_offset;
      const double s = t + w;
      traj.timestamps.push_back(t);
      traj.positions.emplace_back(p.ax * s * s + p.bx * s,
                                  p.ay * s * s + p.by * s,
                                  p.az * s * s + p.bz * s);
    }
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Trajectory> gen_ti(const TiParams& p) {
  check_common(p.dt, p.noise_halfwidth, p.trials);
  if (p.steps < 0) throw ConfigError("ti steps must be >= 0");
  if ((p.init_hi - p.init_lo).minCoeff() < 0.0)
    throw ConfigError("ti init box must satisfy init_lo <= init_hi per axis");

  const double a[3] = {p.ax, p.ay, p.az};
  const double b[3] = {p.bx, p.by, p.bz};

  std::vector<Trajectory> out;
  out.reserve(p.trials);
  for (int trial = 0; trial < p.trials; ++trial) {
    Rng rng(p.seed + static_cast<std::uint64_t>(trial));
    Trajectory traj;
    traj.action_label = p.action_label;

    Eigen::Vector3d pos;
    for (int c = 0; c < 3; ++c)
      pos[c] = rng.uniform(p.init_lo[c], p.init_hi[c]);
    traj.timestamps.push_back(0.0);
    traj.positions.push_back(pos);

    for (int j = 1; j <= p.steps; ++j) {
      double shared = 0.0;
      if (p.shared_noise && p.noise_halfwidth > 0.0)
        shared = rng.uniform(-p.noise_halfwidth, p.noise_halfwidth);
      Eigen::Vector3d next;
      for (int c = 0; c < 3; ++c) {
        double w = shared;
        if (!p.shared_noise && p.noise_halfwidth > 0.0)
          w = rng.uniform(-p.noise_halfwidth, p.noise_halfwidth);
        next[c] = a[c] * pos[c] * pos[c] + b[c] * pos[c] + w;
      }
      if (next.cwiseAbs().maxCoeff() > p.divergence_bound) {
        traj.truncated = true;
        break;
      }
      traj.timestamps.push_back(j * p.dt);
      traj.positions.push_back(next);
      pos = next;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

Trajectory smooth(const Trajectory& traj) {
  Trajectory out;
  out.timestamps = traj.timestamps;
  out.action_label = traj.action_label;
  out.truncated = traj.truncated;
  out.positions.reserve(traj.positions.size());
  for (std::size_t k = 0; k < traj.positions.size(); ++k) {
    if (k == 0)
      out.positions.push_back(traj.positions[0]);
    else
      out.positions.push_back(0.6 * traj.positions[k - 1] + 0.4 * traj.positions[k]);
  }
  return out;
}

std::vector<Sample> make_samples(const Trajectory& traj, int n_past, int m_future,
                                 bool include_action, long* skipped_count) {
  if (n_past < 1 || m_future < 1)
    throw ConfigError("make_samples requires N >= 1 and M >= 1");

  const long len = static_cast<long>(traj.size());
  std::vector<Sample> out;
  if (len < n_past + m_future) {
    if (skipped_count) ++*skipped_count;
    return out;
  }

  const int in_dim = 3 * n_past + (include_action ? 1 : 0) + 1;
  const int out_dim = 3 * m_future;
  out.reserve(static_cast<std::size_t>(len - n_past - m_future + 1));
  for (long k = n_past - 1; k <= len - m_future - 1; ++k) {
    Sample s;
    s.k = k;
    s.input.resize(in_dim);
    int at = 0;
    for (int i = 0; i < n_past; ++i) {  // newest first: p(k), p(k-1), ...
      s.input.segment<3>(at) = traj.positions[static_cast<std::size_t>(k - i)];
      at += 3;
    }
    if (include_action) s.input[at++] = static_cast<double>(traj.action_label);
    s.input[at] = 1.0;
    s.target.resize(out_dim);
    for (int m = 0; m < m_future; ++m)
      s.target.segment<3>(3 * m) = traj.positions[static_cast<std::size_t>(k + 1 + m)];
    out.push_back(std::move(s));
  }
  return out;
}

Eigen::VectorXd model_input(const Sample& sample) {
  if (sample.input.size() < 1) throw DimensionError("sample input is empty");
  return sample.input.head(sample.input.size() - 1);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream ofs(path);
  if (!ofs) throw DataError("cannot open for writing: " + path);
  ofs << "t,x,y,z,action\n";
  char buf[128];
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d\n",
                  traj.timestamps[k], traj.positions[k].x(), traj.positions[k].y(),
                  traj.positions[k].z(), traj.action_label);
    ofs << buf;
  }
  if (!ofs) throw DataError("write failed: " + path);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream ifs(path);
  if (!ifs) throw DataError("cannot open: " + path);
  Trajectory traj;
  std::string line;
  long lineno = 0;
  bool have_prev_t = false;
  double prev_t = 0.0;
  while (std::getline(ifs, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("t,", 0) == 0) continue;  // header
    std::istringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) {
      try {
        vals.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      }
    }
    if (vals.size() != 4 && vals.size() != 5)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 4 or 5 columns, got " +
                       std::to_string(vals.size()));
    const double t = vals[0];
    Eigen::Vector3d pos(vals[1], vals[2], vals[3]);
    if (!std::isfinite(t) || !pos.allFinite())
      throw DataError(path + ":" + std::to_string(lineno) + ": non-finite value");
    if (have_prev_t && t <= prev_t)
      throw DataError(path + ":" + std::to_string(lineno) + ": timestamps not strictly increasing");
    prev_t = t;
    have_prev_t = true;
    traj.timestamps.push_back(t);
    traj.positions.push_back(pos);
    if (vals.size() == 5) traj.action_label = static_cast<int>(std::llround(vals[4]));
  }
  return traj;
}

}  // namespace semiadapt
