#include "lsu/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsu {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Dense two-phase tableau simplex for
//   maximize c'z  subject to  A z <= b, z >= 0.
// Bland's rule throughout; feasible regions here are always bounded
// (the variable-range rows are part of A), so unboundedness is treated
// as a numerical failure.
struct SimplexResult {
    bool feasible = false;
    double value = 0.0;
};

SimplexResult simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& c) {
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();
    constexpr double tol = 1e-10;

    // Count artificials: one per negative rhs row.
    Eigen::Index n_art = 0;
    for (Eigen::Index r = 0; r < m; ++r)
        if (b(r) < 0.0) ++n_art;

    const Eigen::Index ncols = n + m + n_art;  // structural | slack | artificial
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m + 1, ncols + 1);
    std::vector<Eigen::Index> basis(static_cast<size_t>(m));

    Eigen::Index art = n + m;
    for (Eigen::Index r = 0; r < m; ++r) {
        double sign = (b(r) < 0.0) ? -1.0 : 1.0;
        T.block(r, 0, 1, n) = sign * A.row(r);
        T(r, n + r) = sign;  // slack
        T(r, ncols) = sign * b(r);
        if (sign < 0.0) {
            T(r, art) = 1.0;
            basis[static_cast<size_t>(r)] = art++;
        } else {
            basis[static_cast<size_t>(r)] = n + r;
        }
    }

    const Eigen::Index obj = m;
    auto pivot = [&](Eigen::Index pr, Eigen::Index pc) {
        T.row(pr) /= T(pr, pc);
        for (Eigen::Index r = 0; r <= m; ++r) {
            if (r == pr) continue;
            double f = T(r, pc);
            if (f != 0.0) T.row(r) -= f * T.row(pr);
        }
        basis[static_cast<size_t>(pr)] = pc;
    };

    auto run = [&](Eigen::Index col_limit) {
        const Eigen::Index max_iter = 200 * (m + ncols) + 1000;
        for (Eigen::Index iter = 0; iter < max_iter; ++iter) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < col_limit; ++j) {
                if (T(obj, j) < -tol) { enter = j; break; }
            }
            if (enter < 0) return;  // optimal
            Eigen::Index leave = -1;
            double best = 0.0;
            for (Eigen::Index r = 0; r < m; ++r) {
                if (T(r, enter) > tol) {
                    double ratio = T(r, ncols) / T(r, enter);
                    if (leave < 0 || ratio < best - tol ||
                        (ratio < best + tol &&
                         basis[static_cast<size_t>(r)] < basis[static_cast<size_t>(leave)])) {
                        leave = r;
                        best = ratio;
                    }
                }
            }
            if (leave < 0)
                throw std::runtime_error(
                    "bounding_box: LP reported unbounded on a bounded polytope "
                    "(numerical failure)");
            pivot(leave, enter);
        }
        throw std::runtime_error("bounding_box: simplex iteration limit exceeded");
    };

    if (n_art > 0) {
        // Phase 1: minimize the artificial sum.
        for (Eigen::Index j = n + m; j < ncols; ++j) T(obj, j) = 1.0;
        for (Eigen::Index r = 0; r < m; ++r)
            if (basis[static_cast<size_t>(r)] >= n + m) T.row(obj) -= T.row(r);
        run(ncols);
        if (T(obj, ncols) < -1e-8) return {false, 0.0};
        // Drive any residual basic artificials out (or recognize redundant rows).
        for (Eigen::Index r = 0; r < m; ++r) {
            if (basis[static_cast<size_t>(r)] < n + m) continue;
            Eigen::Index pc = -1;
            for (Eigen::Index j = 0; j < n + m; ++j)
                if (std::abs(T(r, j)) > tol) { pc = j; break; }
            if (pc >= 0) pivot(r, pc);
            // else: the row is redundant; its basic artificial stays at zero and
            // can never increase because every entry in the row is ~0.
        }
    }

    // Phase 2.
    T.row(obj).setZero();
    T.block(obj, 0, 1, n) = -c.transpose();
    for (Eigen::Index r = 0; r < m; ++r) {
        Eigen::Index bj = basis[static_cast<size_t>(r)];
        double f = T(obj, bj);
        if (f != 0.0) T.row(obj) -= f * T.row(r);
    }
    run(n + m);  // artificials may not re-enter
    return {true, T(obj, ncols)};
}

}  // namespace

Orthotope::Orthotope(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    require(lower.size() == upper.size() && lower.size() >= 1,
            "Orthotope: lower/upper must have equal length >= 1");
}

Orthotope Orthotope::centered(const Eigen::VectorXd& center, const Eigen::VectorXd& halfwidth) {
    return Orthotope(center - halfwidth, center + halfwidth);
}

Orthotope Orthotope::centered(const Eigen::VectorXd& center, double halfwidth) {
    return centered(center, Eigen::VectorXd::Constant(center.size(), halfwidth));
}

double emptiness_tolerance(double upper) {
    return 1e-12 * std::max(1.0, std::abs(upper));
}

bool interval_empty(double lo, double hi) {
    return lo > hi + emptiness_tolerance(hi);
}

double volume(const Orthotope& o) {
    double v = 1.0;
    for (Eigen::Index i = 0; i < o.dim(); ++i) v *= o.upper(i) - o.lower(i);
    return v;
}

bool contains(const Orthotope& o, const Eigen::VectorXd& x) {
    require(x.size() == o.dim(), "contains: dimension mismatch");
    return (x.array() >= o.lower.array()).all() && (x.array() <= o.upper.array()).all();
}

std::optional<Orthotope> intersect(const Orthotope& a, const Orthotope& b) {
    require(a.dim() == b.dim(), "intersect: dimension mismatch");
    Orthotope out(a.lower.cwiseMax(b.lower), a.upper.cwiseMin(b.upper));
    for (Eigen::Index i = 0; i < out.dim(); ++i)
        if (interval_empty(out.lower(i), out.upper(i))) return std::nullopt;
    return out;
}

std::optional<Orthotope> intersect_many(const std::vector<Orthotope>& boxes) {
    require(!boxes.empty(), "intersect_many: empty list");
    std::optional<Orthotope> acc = boxes.front();
    for (size_t i = 1; i < boxes.size(); ++i) {
        acc = intersect(*acc, boxes[i]);
        if (!acc) return std::nullopt;
    }
    return acc;
}

std::optional<Orthotope> bounding_box(const Orthotope& prior, const StripSet& strips) {
    const Eigen::Index nx = prior.dim();
    require(strips.coeff.cols() == nx, "bounding_box: strip/prior dimension mismatch");
    require(strips.lower.size() == strips.count() && strips.upper.size() == strips.count(),
            "bounding_box: strip bound length mismatch");

    Orthotope box = prior;
    for (Eigen::Index i = 0; i < nx; ++i)
        if (interval_empty(box.lower(i), box.upper(i))) return std::nullopt;

    // Fold single-coefficient strips into the box directly; collect the rest.
    std::vector<Eigen::Index> lp_rows;
    for (Eigen::Index r = 0; r < strips.count(); ++r) {
        Eigen::Index nnz = 0, k = -1;
        for (Eigen::Index j = 0; j < nx; ++j) {
            if (strips.coeff(r, j) != 0.0) { ++nnz; k = j; }
        }
        if (nnz == 0) {
            if (interval_empty(strips.lower(r), 0.0) || interval_empty(0.0, strips.upper(r)))
                return std::nullopt;
        } else if (nnz == 1) {
            double cv = strips.coeff(r, k);
            double lo = strips.lower(r) / cv, hi = strips.upper(r) / cv;
            if (cv < 0.0) std::swap(lo, hi);
            box.lower(k) = std::max(box.lower(k), lo);
            box.upper(k) = std::min(box.upper(k), hi);
            if (interval_empty(box.lower(k), box.upper(k))) return std::nullopt;
        } else {
            lp_rows.push_back(r);
        }
    }

    // Drop strips the box already satisfies everywhere (interval arithmetic),
    // and detect strips the box cannot meet at all.
    std::vector<Eigen::Index> active;
    for (Eigen::Index r : lp_rows) {
        double mn = 0.0, mx = 0.0;
        for (Eigen::Index j = 0; j < nx; ++j) {
            double cv = strips.coeff(r, j);
            mn += cv * (cv >= 0.0 ? box.lower(j) : box.upper(j));
            mx += cv * (cv >= 0.0 ? box.upper(j) : box.lower(j));
        }
        if (interval_empty(strips.lower(r), mx) || interval_empty(mn, strips.upper(r)))
            return std::nullopt;
        if (mn >= strips.lower(r) && mx <= strips.upper(r)) continue;  // inactive
        active.push_back(r);
    }
    if (active.empty()) return box;

    // LP in z = x - box.lower, 0 <= z; rows: z range, then two per strip.
    const Eigen::Index m = nx + 2 * static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, nx);
    Eigen::VectorXd b(m);
    A.topRows(nx) = Eigen::MatrixXd::Identity(nx, nx);
    b.head(nx) = box.upper - box.lower;
    for (size_t s = 0; s < active.size(); ++s) {
        Eigen::Index r = active[s];
        Eigen::Index row = nx + 2 * static_cast<Eigen::Index>(s);
        double shift = strips.coeff.row(r) * box.lower;
        A.row(row) = strips.coeff.row(r);
        b(row) = strips.upper(r) - shift;
        A.row(row + 1) = -strips.coeff.row(r);
        b(row + 1) = shift - strips.lower(r);
    }

    Orthotope out = box;
    for (Eigen::Index i = 0; i < nx; ++i) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(nx);
        c(i) = 1.0;
        SimplexResult hi = simplex_max(A, b, c);
        if (!hi.feasible) return std::nullopt;
        c(i) = -1.0;
        SimplexResult lo = simplex_max(A, b, c);
        if (!lo.feasible) return std::nullopt;
        out.upper(i) = std::min(box.upper(i), box.lower(i) + hi.value);
        out.lower(i) = std::max(box.lower(i), box.lower(i) - lo.value);
        if (out.lower(i) > out.upper(i)) {
            // tolerance-level inversion from the LP; collapse to the midpoint
            double mid = 0.5 * (out.lower(i) + out.upper(i));
            out.lower(i) = out.upper(i) = mid;
        }
    }
    return out;
}

}  // namespace lsu
