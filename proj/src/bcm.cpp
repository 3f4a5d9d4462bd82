#include "lsu/bcm.hpp"

#include <stdexcept>

namespace lsu {

void BcmSystem::validate() const {
    if (A.rows() != A.cols()) throw std::invalid_argument("BcmSystem: A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("BcmSystem: B row count must match A");
    if (w_half.size() != A.rows())
        throw std::invalid_argument("BcmSystem: w_half length must equal nx");
    if (channels.empty()) throw std::invalid_argument("BcmSystem: at least one channel");
    for (const auto& ch : channels) {
        if (ch.C.cols() != A.rows())
            throw std::invalid_argument("BcmSystem: channel C column count must match nx");
        if (ch.v_half.size() != ch.C.rows())
            throw std::invalid_argument("BcmSystem: channel v_half length mismatch");
    }
}

DataUpdate bcm_data_update(const Orthotope& prior,
                           const std::vector<std::pair<Eigen::VectorXd, ChannelModel>>& observations,
                           EmptyPolicy) {
    Orthotope box = prior;
    for (const auto& [y, ch] : observations) {
        DataUpdate du = data_update(box, y, ch.C, ch.v_half);
        if (du.empty_polytope) return {prior, true};
        box = du.posterior;
    }
    return {box, false};
}

RunResult run_bcm(const BcmSystem& system, const Orthotope& prior,
                  const std::vector<Eigen::MatrixXd>& channel_obs,
                  const Eigen::MatrixXd& inputs, EmptyPolicy policy) {
    system.validate();
    if (channel_obs.size() != system.channels.size())
        throw std::invalid_argument("run_bcm: one observation matrix per channel expected");
    const int horizon = channel_obs.empty() ? 0 : static_cast<int>(channel_obs[0].rows());
    if (horizon < 1) throw std::invalid_argument("run_bcm: empty observation sequence");
    for (size_t i = 0; i < channel_obs.size(); ++i)
        if (channel_obs[i].rows() != horizon ||
            channel_obs[i].cols() != system.channels[i].ny())
            throw std::invalid_argument("run_bcm: channel observation shape mismatch");

    LsuModel dynamics;  // time update only needs A, B, w_half
    dynamics.A = system.A;
    dynamics.B = system.B;
    dynamics.w_half = system.w_half;

    RunResult out;
    out.steps.reserve(static_cast<size_t>(horizon));
    Orthotope predictor = prior;
    for (int t = 1; t <= horizon; ++t) {
        std::vector<std::pair<Eigen::VectorXd, ChannelModel>> obs;
        obs.reserve(system.channels.size());
        for (size_t i = 0; i < system.channels.size(); ++i)
            obs.emplace_back(channel_obs[i].row(t - 1).transpose(), system.channels[i]);

        FilterState st;
        st.time_index = t;
        st.predictor = predictor;
        DataUpdate du = bcm_data_update(predictor, obs);
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
            predictor = time_update(du.posterior, dynamics, inputs.row(t - 1).transpose());
    }
    return out;
}

}  // namespace lsu
