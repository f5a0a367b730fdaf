#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace semiadapt {

// One joint trajectory: strictly increasing timestamps, 3-D positions, and a
// motion-class label. Units are meters for the time-varying generator and
// Kinect-style CSV data, decimeters for the time-invariant generator.
struct Trajectory {
  std::vector<double> timestamps;
  std::vector<Eigen::Vector3d> positions;
  int action_label = 0;
  bool truncated = false;  // set when the divergence guard cut the trial short

  std::size_t size() const { return positions.size(); }
};

// Quadratic curve parameterized by time, with uniform noise added to t. By
// default a fresh draw is made at every sample (shared by the three axes);
// with per_trial_noise set, one draw per trial acts as a random time offset,
// so trials become shifted copies of the curve.
struct TvParams {
  double ax = 0.4, bx = -2.0;
  double ay = 0.0, by = 0.9;
  double az = 0.0, bz = 1.05;
  double noise_halfwidth = 1.0;
  double dt = 0.05;
  double duration = 5.0;
  int trials = 50;
  std::uint64_t seed = 0;
  int action_label = 0;
  bool per_trial_noise = false;
};

// Quadratic state-transition map iterated from a randomized initial position.
// Noise is drawn independently per axis per step unless shared_noise is set.
// init_lo == init_hi pins the initial position exactly.
struct TiParams {
  double ax = 0.06, bx = 0.92;
  double ay = 0.0, by = 0.9;
  double az = 0.0, bz = 1.05;
  double noise_halfwidth = 0.01;
  double dt = 0.05;
  int steps = 60;  // the 1.05 axis grows ~19x over 60 steps; longer trials swamp training
  int trials = 50;
  std::uint64_t seed = 0;
  int action_label = 0;
  Eigen::Vector3d init_lo = Eigen::Vector3d::Zero();
  Eigen::Vector3d init_hi = Eigen::Vector3d::Ones();
  bool shared_noise = false;
  double divergence_bound = 1e3;
};

// One supervised pair. input = [p(k), p(k-1), ..., p(k-N+1), (action), 1],
// target = [p(k+1), ..., p(k+M)]. The trailing constant 1 is part of the
// input convention; the network consumes everything before it.
struct Sample {
  Eigen::VectorXd input;
  Eigen::VectorXd target;
  long k = 0;
};

std::vector<Trajectory> gen_tv(const TvParams& params);
std::vector<Trajectory> gen_ti(const TiParams& params);

// Low-pass filter p_s(k) = 0.6*p(k-1) + 0.4*p(k) over raw measurements; the
// first sample passes through unchanged.
Trajectory smooth(const Trajectory& traj);

// Windows a trajectory into samples for past horizon N and future horizon M.
// Too-short trajectories yield an empty list; *skipped_count (optional)
// reports how many trajectories were too short (incremented by one).
std::vector<Sample> make_samples(const Trajectory& traj, int n_past, int m_future,
                                 bool include_action, long* skipped_count = nullptr);

// Model-facing view of a sample input: everything before the trailing 1.
Eigen::VectorXd model_input(const Sample& sample);

// Trajectory CSV: header "t,x,y,z,action", one row per sample, action column
// optional on read.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace semiadapt
