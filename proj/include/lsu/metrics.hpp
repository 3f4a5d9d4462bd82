#pragma once

#include <string>
#include <vector>

#include "lsu/geometry.hpp"

namespace lsu {

/// Evaluation window [t_lo, t_hi], 1-based and inclusive.
struct Window {
    int t_lo = 1;
    int t_hi = 1;

    int length() const { return t_hi - t_lo + 1; }
};

/// Sum over the window of the squared Euclidean estimation error.
/// Sequences are indexed from t = 1 (element 0).
double tnse(const std::vector<Eigen::VectorXd>& estimates,
            const std::vector<Eigen::VectorXd>& truths, Window w);

/// Mean posterior volume over the window.
double av(const std::vector<Orthotope>& posteriors, Window w);

/// Mean over the window of VT_t / VI_t (the ratio sits inside the mean).
/// Requires paired runs on identical trajectories. VI_t == 0 is a hard error.
double avr(const std::vector<double>& with_transfer,
           const std::vector<double>& isolated, Window w);

/// Fraction of window steps at which the true state lies in the posterior.
double containment(const std::vector<Orthotope>& posteriors,
                   const std::vector<Eigen::VectorXd>& truths, Window w);

/// One results row: a (method, noise-ratio, seed) cell.
struct MetricsRecord {
    std::string method;
    double ratio = 1.0;  // r_s / r
    std::uint64_t seed = 0;
    Window window;
    double tnse = 0.0;
    double av = 0.0;
    double avr = 1.0;
    double p_c = 0.0;
    bool discarded = false;
    int empty_data_updates = 0;
    int empty_transfers = 0;
};

extern const char* const kMetricsCsvHeader;

std::string metrics_csv_row(const MetricsRecord& r);

/// Mean of per-seed metrics over the non-discarded rows of one
/// (method, ratio) cell, reduced in ascending seed order.
MetricsRecord aggregate_mean(std::vector<MetricsRecord> rows);

}  // namespace lsu
