#pragma once

#include <utility>
#include <vector>

#include "lsu/filter.hpp"

namespace lsu {

/// One observation channel of the complete (V-shaped) model: y_i = C_i x + v_i.
struct ChannelModel {
    Eigen::MatrixXd C;
    Eigen::VectorXd v_half;

    Eigen::Index ny() const { return C.rows(); }
};

/// Common state dynamics shared by all channels of the central modeller.
struct BcmSystem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::VectorXd w_half;
    std::vector<ChannelModel> channels;

    void validate() const;
};

/// Sequential per-channel data updates (each with its own tight orthotopic
/// circumscription), in the order the channels are listed.
DataUpdate bcm_data_update(const Orthotope& prior,
                           const std::vector<std::pair<Eigen::VectorXd, ChannelModel>>& observations,
                           EmptyPolicy policy = EmptyPolicy::Skip);

/// Central filter over all channels: per step, bcm_data_update over every
/// channel, then one common time update. channel_obs[i] is horizon x ny_i.
/// With one channel this is identical to run_isolated.
RunResult run_bcm(const BcmSystem& system, const Orthotope& prior,
                  const std::vector<Eigen::MatrixXd>& channel_obs,
                  const Eigen::MatrixXd& inputs, EmptyPolicy policy);

}  // namespace lsu
