#pragma once

#include <vector>

#include "lsu/filter.hpp"
#include "lsu/synthesis.hpp"

namespace lsu {

/// Brute-force dense-grid Bayes filter for nx <= 2: tracks the exact support
/// of the filtering pdf on a grid of pitch-sized cells (cell centers are
/// guaranteed members of the true support, so the reported hull is a subset
/// of it up to one pitch). Returns the per-step posterior support hull.
/// Throws when the grid would exceed the memory bound (the message suggests
/// a coarser pitch) or when a posterior support empties (analysis/synthesis
/// mismatch — outside the oracle's contract).
std::vector<Orthotope> oracle_grid_filter(const LsuModel& model, const Trajectory& trajectory,
                                          double grid_pitch, const Orthotope& prior);

}  // namespace lsu
