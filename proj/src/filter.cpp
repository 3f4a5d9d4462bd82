#include "lsu/filter.hpp"

#include <stdexcept>

namespace lsu {

void LsuModel::validate() const {
    auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
    if (A.rows() != A.cols()) fail("LsuModel: A must be square");
    if (B.rows() != A.rows()) fail("LsuModel: B row count must match A");
    if (C.cols() != A.rows()) fail("LsuModel: C column count must match A");
    if (w_half.size() != A.rows()) fail("LsuModel: w_half length must equal nx");
    if (v_half.size() != C.rows()) fail("LsuModel: v_half length must equal ny");
    for (Eigen::Index i = 0; i < w_half.size(); ++i)
        if (!(w_half(i) > 0.0) || !std::isfinite(w_half(i)))
            fail("LsuModel: w_half entries must be positive and finite");
    for (Eigen::Index i = 0; i < v_half.size(); ++i)
        if (!(v_half(i) > 0.0) || !std::isfinite(v_half(i)))
            fail("LsuModel: v_half entries must be positive and finite");
}

DataUpdate data_update(const Orthotope& prior, const Eigen::VectorXd& y,
                       const Eigen::MatrixXd& C, const Eigen::VectorXd& v_half) {
    if (C.cols() != prior.dim() || y.size() != C.rows() || v_half.size() != C.rows())
        throw std::invalid_argument("data_update: dimension mismatch");
    StripSet strips{C, y - v_half, y + v_half};
    auto box = bounding_box(prior, strips);
    if (!box) return {prior, true};
    return {*box, false};
}

DataUpdate data_update(const Orthotope& prior, const Eigen::VectorXd& y,
                       const LsuModel& model, EmptyPolicy) {
    return data_update(prior, y, model.C, model.v_half);
}

Orthotope time_update(const Orthotope& posterior, const LsuModel& model,
                      const Eigen::VectorXd& u) {
    if (posterior.dim() != model.nx() || u.size() != model.nu())
        throw std::invalid_argument("time_update: dimension mismatch");
    const Eigen::Index nx = model.nx();
    Eigen::VectorXd shift = model.B * u;
    Eigen::VectorXd lo(nx), hi(nx);
    for (Eigen::Index i = 0; i < nx; ++i) {
        double l = 0.0, h = 0.0;
        for (Eigen::Index j = 0; j < nx; ++j) {
            double a = model.A(i, j) * posterior.lower(j);
            double b = model.A(i, j) * posterior.upper(j);
            l += std::min(a, b);
            h += std::max(a, b);
        }
        lo(i) = l + shift(i) - model.w_half(i);
        hi(i) = h + shift(i) + model.w_half(i);
    }
    return Orthotope(lo, hi);
}

RunResult run_isolated(const LsuModel& model, const Orthotope& prior,
                       const Eigen::MatrixXd& observations,
                       const Eigen::MatrixXd& inputs, EmptyPolicy policy) {
    model.validate();
    const int horizon = static_cast<int>(observations.rows());
    if (horizon < 1) throw std::invalid_argument("run_isolated: empty observation sequence");
    if (observations.cols() != model.ny() || inputs.rows() != horizon ||
        inputs.cols() != model.nu())
        throw std::invalid_argument("run_isolated: observation/input shape mismatch");

    RunResult out;
    out.steps.reserve(static_cast<size_t>(horizon));
    Orthotope predictor = prior;
    for (int t = 1; t <= horizon; ++t) {
        FilterState st;
        st.time_index = t;
        st.predictor = predictor;
        DataUpdate du = data_update(predictor, observations.row(t - 1).transpose(),
                                    model.C, model.v_half);
        if (du.empty_polytope) {
            ++out.empty_data_updates;
            if (policy == EmptyPolicy::DiscardRun) {
                out.discarded = true;
                return out;
            }
        }
        st.posterior = du.posterior;
        out.steps.push_back(st);
        if (t < horizon)
            predictor = time_update(du.posterior, model, inputs.row(t - 1).transpose());
    }
    return out;
}

}  // namespace lsu
