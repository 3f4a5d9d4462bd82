#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace lsu {

/// Axis-aligned box {x : lower <= x <= upper}. Zero-width faces are legal.
struct Orthotope {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Orthotope() = default;
    Orthotope(Eigen::VectorXd lo, Eigen::VectorXd hi);

    Eigen::Index dim() const { return lower.size(); }

    /// Centered box: center +- halfwidth per coordinate.
    static Orthotope centered(const Eigen::VectorXd& center, const Eigen::VectorXd& halfwidth);
    static Orthotope centered(const Eigen::VectorXd& center, double halfwidth);

    Eigen::VectorXd midpoint() const { return 0.5 * (lower + upper); }
    Eigen::VectorXd widths() const { return upper - lower; }

    bool operator==(const Orthotope& o) const { return lower == o.lower && upper == o.upper; }
};

/// Set of parallel-hyperplane constraints {x : lower <= coeff * x <= upper},
/// one strip per row of coeff.
struct StripSet {
    Eigen::MatrixXd coeff;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index count() const { return coeff.rows(); }
};

/// lower[i] > upper[i] beyond this tolerance marks an interval (and hence a
/// box) as empty.
double emptiness_tolerance(double upper);

/// True iff the interval [lo, hi] is empty to tolerance.
bool interval_empty(double lo, double hi);

double volume(const Orthotope& o);

bool contains(const Orthotope& o, const Eigen::VectorXd& x);

/// Componentwise max/min box; nullopt if the result is empty.
std::optional<Orthotope> intersect(const Orthotope& a, const Orthotope& b);

/// Fold of intersect over a non-empty list; order-independent.
std::optional<Orthotope> intersect_many(const std::vector<Orthotope>& boxes);

/// Tightest axis-aligned box circumscribing the polytope
/// {x : prior.lower <= x <= prior.upper, strips.lower <= C x <= strips.upper},
/// found by minimizing/maximizing each coordinate (linear programs; rows with
/// a single nonzero coefficient are folded in as direct bound tightenings).
/// Returns nullopt when the polytope is infeasible.
/// The result is a superset of the polytope and a subset of prior.
std::optional<Orthotope> bounding_box(const Orthotope& prior, const StripSet& strips);

}  // namespace lsu
