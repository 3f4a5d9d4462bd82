#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lsu/bcm.hpp"
#include "lsu/filter.hpp"

namespace lsu {

/// Synthesized data for one run: states row t-1 = x_t, inputs row t-1 = u_t,
/// channel_obs[i] row t-1 = y_{i,t}. source_states is present only for
/// U-shaped synthesis (then states are the target's path).
struct Trajectory {
    Eigen::MatrixXd states;
    std::vector<Eigen::MatrixXd> channel_obs;
    Eigen::MatrixXd inputs;
    std::optional<Eigen::MatrixXd> source_states;
    std::uint64_t seed = 0;
};

enum class MismatchKind { None, Rotation, Dilation, RadialShift, StateNoise };

/// Analysis-model perturbation applied to the target's state matrix.
struct MismatchSpec {
    MismatchKind kind = MismatchKind::None;
    double angle = 0.0;      // rotation, radians
    double factor = 1.0;     // dilation sigma / radial-shift q
    int eigen_index = 0;     // radial shift: which eigenvalue (sorted by real part)
    double alpha = 0.0;      // state-noise interaction (realized in synthesis)
};

struct InputGenerator {
    enum class Kind { Zero, Step, UniformRandom };
    Kind kind = Kind::Zero;
    double amplitude = 0.0;        // step
    double lo = 0.0, hi = 0.0;     // uniform-random

    Eigen::MatrixXd generate(int horizon, Eigen::Index nu, std::mt19937_64& rng) const;
};

/// Deterministic per-role RNG stream so results do not depend on worker
/// scheduling. Streams are derived from (master seed, run, role, channel).
/// Roles: 0 state noise, 1 U-shape interaction noise, 2 inputs,
/// 3 + i observation noise of channel i.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t run, std::uint64_t role,
                            std::uint64_t channel = 0);

/// Raw uniform draw on [-1, 1]^n, scaled by the half-width vector.
Eigen::VectorXd uniform_box_draw(std::mt19937_64& rng, const Eigen::VectorXd& halfwidth);

/// V-shaped synthesis: one common state path, every channel observes it
/// under its own independent uniform noise.
Trajectory simulate_v(const LsuModel& model, const std::vector<ChannelModel>& channels,
                      int horizon, const InputGenerator& input_gen, std::uint64_t seed,
                      const Eigen::VectorXd& x1);

/// U-shaped synthesis: the source path follows the state recursion, the
/// target path is x_t = x_{s,t} + e_t with e_t uniform on +-alpha*w_half.
/// channels[0] observes the target path; every other channel observes the
/// source path. With alpha = 0 this reduces to the V-shape.
Trajectory simulate_u(const LsuModel& model, double alpha,
                      const std::vector<ChannelModel>& channels, int horizon,
                      const InputGenerator& input_gen, std::uint64_t seed,
                      const Eigen::VectorXd& x1);

/// Spectrum perturbation: eigendecompose A, modify the eigenvalues per the
/// spec (conjugate pairs stay conjugate), reconstruct and truncate the
/// imaginary residue. Dilation multiplies A directly.
Eigen::MatrixXd apply_mismatch(const Eigen::MatrixXd& A_synth, const MismatchSpec& spec);

struct BuiltinSystems {
    LsuModel system2;  // second order, complex conjugate pole pair
    LsuModel system3;  // third order, three distinct real poles
};

/// The two benchmark systems. Noise half-widths are placeholders (1.0);
/// experiments overwrite them.
BuiltinSystems builtin_systems();

/// Trajectory CSV: header t,x_1..x_nx,u_1..u_nu,y_1_1..; one row per step.
std::string trajectory_to_csv(const Trajectory& tr);
Trajectory trajectory_from_csv(const std::string& csv,
                               Eigen::Index nx, Eigen::Index nu,
                               const std::vector<Eigen::Index>& channel_dims);

}  // namespace lsu
