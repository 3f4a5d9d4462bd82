#pragma once

#include <string>
#include <vector>

#include "lsu/filter.hpp"

namespace lsu {

/// A source task's state predictor support at one step, as made available
/// to the target.
struct SourcePredictor {
    Orthotope support;
    std::string source_id;
    int time_index = 1;
};

struct TransferOutcome {
    Orthotope conditioned_predictor;
    std::vector<bool> accepted;  // per source; all-true unless fallback
    bool fallback_used = false;
};

/// FPD-optimal conditioning of the target predictor on the source state
/// predictors: intersection of all supports. If the joint intersection is
/// empty, transfer is stopped and the target's own predictor is kept
/// (accepted[i] then records which pairwise intersections were non-empty,
/// for diagnostics only).
TransferOutcome transfer_step(const Orthotope& target_predictor,
                              const std::vector<SourcePredictor>& sources);

/// Test helper: the all-or-nothing fallback invariant.
/// fallback  => conditioned == target predictor;
/// !fallback => conditioned is a subset of the target predictor and of every
///              source support.
bool all_or_nothing_semantics_check(const TransferOutcome& outcome,
                                    const Orthotope& target_predictor,
                                    const std::vector<SourcePredictor>& sources);

/// One filtering task participating in FPD-BTL.
struct BtlTask {
    LsuModel model;
    Orthotope prior;
    Eigen::MatrixXd observations;  // horizon x ny
};

struct BtlResult {
    RunResult target;
    std::vector<RunResult> sources;
    std::vector<TransferOutcome> transfers;  // one per completed target step
    int empty_transfers = 0;
};

/// Per step t: (I) intersect the target predictor with every source
/// predictor; (II) every task runs its local data update (the target on the
/// conditioned predictor); (III) every task runs its local time update.
/// The run terminates with transfer + data update at the final step.
/// Sources never receive target knowledge. With no sources the target output
/// is identical to run_isolated.
BtlResult run_btl(const BtlTask& target, const std::vector<BtlTask>& sources,
                  const Eigen::MatrixXd& inputs, EmptyPolicy policy);

/// Flat CSV record of a source predictor: source_id, t, lower..., upper...
std::string source_predictor_csv_row(const SourcePredictor& sp);

}  // namespace lsu
