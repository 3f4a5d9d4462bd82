#pragma once

#include <optional>
#include <vector>

#include "lsu/geometry.hpp"

namespace lsu {

/// What to do when a data update meets an empty prior/strip polytope
/// (possible only under analysis/synthesis mismatch): keep the prior and
/// flag the step, or abort the run and exclude it from aggregation.
enum class EmptyPolicy { Skip, DiscardRun };

/// Linear state-space model with uniform additive noises:
///   y_t     = C x_t + v_t,            |v_t| <= v_half componentwise
///   x_{t+1} = A x_t + B u_t + w_{t+1},|w_t| <= w_half componentwise
struct LsuModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd C;
    Eigen::VectorXd w_half;
    Eigen::VectorXd v_half;

    Eigen::Index nx() const { return A.rows(); }
    Eigen::Index nu() const { return B.cols(); }
    Eigen::Index ny() const { return C.rows(); }

    /// Throws std::invalid_argument on inconsistent dimensions or
    /// non-positive/non-finite noise half-widths.
    void validate() const;
};

/// Predictor/posterior pair for one filtering step. The posterior is absent
/// for steps where only a predictor exists (never in completed runs).
struct FilterState {
    Orthotope predictor;             // supp f(x_t | d(t-1))
    std::optional<Orthotope> posterior;  // supp f(x_t | d(t))
    int time_index = 1;
};

struct DataUpdate {
    Orthotope posterior;
    bool empty_polytope = false;  // strips were inconsistent with the prior
};

/// Conditions the prior box on observation y: intersects the prior with the
/// ny strips  y - v_half <= C x <= y + v_half  and circumscribes the result
/// by the tightest orthotope. On an empty polytope the prior is returned
/// unchanged with the flag raised; the caller applies the EmptyPolicy.
DataUpdate data_update(const Orthotope& prior, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& C, const Eigen::VectorXd& v_half);
DataUpdate data_update(const Orthotope& prior, const Eigen::VectorXd& y,
                       const LsuModel& model, EmptyPolicy policy = EmptyPolicy::Skip);

/// Interval image of the dynamics plus state-noise inflation:
///   lo_i = sum_j min(A_ij lo_j, A_ij hi_j) + (B u)_i - w_half_i
///   hi_i = sum_j max(A_ij lo_j, A_ij hi_j) + (B u)_i + w_half_i
/// The output contains {A x + B u + w : x in posterior, |w| <= w_half}.
Orthotope time_update(const Orthotope& posterior, const LsuModel& model,
                      const Eigen::VectorXd& u);

struct RunResult {
    std::vector<FilterState> steps;
    bool discarded = false;
    int empty_data_updates = 0;
};

/// Isolated LSU-UOS filter: data update at t = 1..horizon, time update
/// between consecutive steps (the run ends on the final data update).
/// observations is horizon x ny, inputs horizon x nu (row t-1 = u_t).
RunResult run_isolated(const LsuModel& model, const Orthotope& prior,
                       const Eigen::MatrixXd& observations,
                       const Eigen::MatrixXd& inputs, EmptyPolicy policy);

}  // namespace lsu
