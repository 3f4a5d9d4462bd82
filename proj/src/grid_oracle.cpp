#include "lsu/grid_oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsu {

namespace {

constexpr long kMaxCells = 4'000'000;

struct Grid {
    Eigen::VectorXd lo;       // domain lower corner
    Eigen::VectorXd step;     // cell edge per axis
    long n0 = 1, n1 = 1;      // cells per axis (n1 == 1 in 1-D)
    std::vector<char> feas;

    double center(int axis, long i) const {
        return lo(axis) + (static_cast<double>(i) + 0.5) * step(axis);
    }
    long cells() const { return n0 * n1; }
};

Grid make_grid(const Orthotope& box, double pitch) {
    const Eigen::Index nx = box.dim();
    Grid g;
    g.lo = box.lower;
    g.step = Eigen::VectorXd::Ones(nx);
    auto axis_cells = [&](Eigen::Index k) {
        double w = box.upper(k) - box.lower(k);
        long n = std::max<long>(1, static_cast<long>(std::ceil(w / pitch)));
        g.step(k) = (n > 0 && w > 0.0) ? w / static_cast<double>(n) : pitch;
        return n;
    };
    g.n0 = axis_cells(0);
    if (nx == 2) g.n1 = axis_cells(1);
    if (g.cells() > kMaxCells) {
        double w = (box.upper - box.lower).maxCoeff();
        double suggested = w / std::sqrt(static_cast<double>(kMaxCells));
        throw std::runtime_error("oracle_grid_filter: grid of " + std::to_string(g.cells()) +
                                 " cells exceeds the memory bound; try pitch >= " +
                                 std::to_string(suggested));
    }
    g.feas.assign(static_cast<size_t>(g.cells()), 1);
    return g;
}

}  // namespace

std::vector<Orthotope> oracle_grid_filter(const LsuModel& model, const Trajectory& trajectory,
                                          double grid_pitch, const Orthotope& prior) {
    model.validate();
    const Eigen::Index nx = model.nx();
    if (nx > 2) throw std::invalid_argument("oracle_grid_filter: nx <= 2 required");
    if (prior.dim() != nx) throw std::invalid_argument("oracle_grid_filter: prior dimension");
    if (!(grid_pitch > 0.0)) throw std::invalid_argument("oracle_grid_filter: pitch must be > 0");
    if (trajectory.channel_obs.empty() || trajectory.channel_obs[0].cols() != model.ny())
        throw std::invalid_argument("oracle_grid_filter: trajectory channel 0 must match ny");

    const int horizon = static_cast<int>(trajectory.channel_obs[0].rows());
    std::vector<Orthotope> supports;
    supports.reserve(static_cast<size_t>(horizon));

    Grid g = make_grid(prior, grid_pitch);

    for (int t = 1; t <= horizon; ++t) {
        Eigen::VectorXd y = trajectory.channel_obs[0].row(t - 1).transpose();
        Eigen::VectorXd c(nx);
        Eigen::VectorXd hull_lo = Eigen::VectorXd::Constant(nx, 1e300);
        Eigen::VectorXd hull_hi = Eigen::VectorXd::Constant(nx, -1e300);
        bool any = false;
        for (long i = 0; i < g.n0; ++i) {
            c(0) = g.center(0, i);
            for (long j = 0; j < g.n1; ++j) {
                size_t idx = static_cast<size_t>(i * g.n1 + j);
                if (!g.feas[idx]) continue;
                if (nx == 2) c(1) = g.center(1, j);
                Eigen::VectorXd resid = (y - model.C * c).cwiseAbs() - model.v_half;
                if ((resid.array() > 0.0).any()) {
                    g.feas[idx] = 0;
                    continue;
                }
                any = true;
                hull_lo = hull_lo.cwiseMin(c);
                hull_hi = hull_hi.cwiseMax(c);
            }
        }
        if (!any)
            throw std::runtime_error("oracle_grid_filter: empty posterior at t=" +
                                     std::to_string(t));
        supports.emplace_back(hull_lo, hull_hi);

        if (t == horizon) break;

        // Time update: image of feasible centers through the dynamics,
        // dilated by the state-noise box.
        Eigen::VectorXd u = trajectory.inputs.row(t - 1).transpose();
        Eigen::VectorXd shift = model.B * u;
        Orthotope next_domain = time_update(supports.back(), model, u);
        Grid ng = make_grid(next_domain, grid_pitch);
        std::vector<int> diff(static_cast<size_t>((ng.n0 + 1) * (ng.n1 + 1)), 0);
        auto mark = [&](const Eigen::VectorXd& p) {
            // index range of centers within the closed box p +- w_half
            long i0[2] = {0, 0}, i1[2] = {0, 0};
            long nax[2] = {ng.n0, ng.n1};
            for (Eigen::Index k = 0; k < nx; ++k) {
                double a = p(k) - model.w_half(k), b = p(k) + model.w_half(k);
                double l0 = (a - ng.lo(k)) / ng.step(k) - 0.5;
                double l1 = (b - ng.lo(k)) / ng.step(k) - 0.5;
                i0[k] = std::max<long>(0, static_cast<long>(std::ceil(l0)));
                i1[k] = std::min<long>(nax[k] - 1, static_cast<long>(std::floor(l1)));
                if (i0[k] > i1[k]) return;
            }
            size_t stride = static_cast<size_t>(ng.n1 + 1);
            diff[static_cast<size_t>(i0[0]) * stride + static_cast<size_t>(i0[1])] += 1;
            diff[static_cast<size_t>(i1[0] + 1) * stride + static_cast<size_t>(i0[1])] -= 1;
            diff[static_cast<size_t>(i0[0]) * stride + static_cast<size_t>(i1[1] + 1)] -= 1;
            diff[static_cast<size_t>(i1[0] + 1) * stride + static_cast<size_t>(i1[1] + 1)] += 1;
        };
        for (long i = 0; i < g.n0; ++i) {
            c(0) = g.center(0, i);
            for (long j = 0; j < g.n1; ++j) {
                if (!g.feas[static_cast<size_t>(i * g.n1 + j)]) continue;
                if (nx == 2) c(1) = g.center(1, j);
                mark(model.A * c + shift);
            }
        }
        // 2-D prefix sum of the difference array -> coverage counts
        const size_t stride = static_cast<size_t>(ng.n1 + 1);
        for (long i = 0; i < ng.n0; ++i) {
            int rowacc = 0;
            for (long j = 0; j < ng.n1; ++j) {
                rowacc += diff[static_cast<size_t>(i) * stride + static_cast<size_t>(j)];
                diff[static_cast<size_t>(i) * stride + static_cast<size_t>(j)] = rowacc;
            }
        }
        for (long j = 0; j < ng.n1; ++j) {
            int colacc = 0;
            for (long i = 0; i < ng.n0; ++i) {
                colacc += diff[static_cast<size_t>(i) * stride + static_cast<size_t>(j)];
                ng.feas[static_cast<size_t>(i * ng.n1 + j)] = colacc > 0 ? 1 : 0;
            }
        }
        g = std::move(ng);
    }
    return supports;
}

}  // namespace lsu
