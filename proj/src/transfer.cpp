#include "lsu/transfer.hpp"

#include <cstdio>
#include <stdexcept>

namespace lsu {

namespace {

bool subset_of(const Orthotope& inner, const Orthotope& outer) {
    return (inner.lower.array() >= outer.lower.array()).all() &&
           (inner.upper.array() <= outer.upper.array()).all();
}

}  // namespace

TransferOutcome transfer_step(const Orthotope& target_predictor,
                              const std::vector<SourcePredictor>& sources) {
    std::vector<Orthotope> boxes;
    boxes.reserve(sources.size() + 1);
    boxes.push_back(target_predictor);
    for (const auto& s : sources) {
        if (s.support.dim() != target_predictor.dim())
            throw std::invalid_argument("transfer_step: source dimension mismatch");
        boxes.push_back(s.support);
    }
    TransferOutcome out;
    auto joint = intersect_many(boxes);
    if (joint) {
        out.conditioned_predictor = *joint;
        out.accepted.assign(sources.size(), true);
        out.fallback_used = false;
    } else {
        out.conditioned_predictor = target_predictor;
        out.fallback_used = true;
        out.accepted.reserve(sources.size());
        for (const auto& s : sources)
            out.accepted.push_back(intersect(target_predictor, s.support).has_value());
    }
    return out;
}

bool all_or_nothing_semantics_check(const TransferOutcome& outcome,
                                    const Orthotope& target_predictor,
                                    const std::vector<SourcePredictor>& sources) {
    if (outcome.fallback_used)
        return outcome.conditioned_predictor == target_predictor;
    if (!subset_of(outcome.conditioned_predictor, target_predictor)) return false;
    for (const auto& s : sources)
        if (!subset_of(outcome.conditioned_predictor, s.support)) return false;
    return true;
}

BtlResult run_btl(const BtlTask& target, const std::vector<BtlTask>& sources,
                  const Eigen::MatrixXd& inputs, EmptyPolicy policy) {
    target.model.validate();
    for (const auto& s : sources) {
        s.model.validate();
        if (s.model.nx() != target.model.nx())
            throw std::invalid_argument("run_btl: tasks must share the state dimension");
        if (s.observations.rows() != target.observations.rows())
            throw std::invalid_argument("run_btl: tasks must share the horizon");
    }
    const int horizon = static_cast<int>(target.observations.rows());
    if (horizon < 1) throw std::invalid_argument("run_btl: empty observation sequence");

    BtlResult out;
    out.sources.resize(sources.size());
    out.target.steps.reserve(static_cast<size_t>(horizon));
    out.transfers.reserve(static_cast<size_t>(horizon));

    Orthotope target_predictor = target.prior;
    std::vector<Orthotope> source_predictors;
    source_predictors.reserve(sources.size());
    for (const auto& s : sources) source_predictors.push_back(s.prior);

    for (int t = 1; t <= horizon; ++t) {
        // I. knowledge transfer
        std::vector<SourcePredictor> offered;
        offered.reserve(sources.size());
        for (size_t k = 0; k < sources.size(); ++k)
            offered.push_back({source_predictors[k], "s" + std::to_string(k), t});
        TransferOutcome tr = transfer_step(target_predictor, offered);
        if (tr.fallback_used) ++out.empty_transfers;

        // II. local data updates
        FilterState tstate;
        tstate.time_index = t;
        tstate.predictor = target_predictor;
        DataUpdate tdu = data_update(tr.conditioned_predictor,
                                     target.observations.row(t - 1).transpose(),
                                     target.model.C, target.model.v_half);
        if (tdu.empty_polytope) {
            ++out.target.empty_data_updates;
            if (policy == EmptyPolicy::DiscardRun) {
                out.target.discarded = true;
                return out;
            }
        }
        tstate.posterior = tdu.posterior;
        out.target.steps.push_back(tstate);
        out.transfers.push_back(std::move(tr));

        std::vector<Orthotope> source_posteriors;
        source_posteriors.reserve(sources.size());
        for (size_t k = 0; k < sources.size(); ++k) {
            FilterState sstate;
            sstate.time_index = t;
            sstate.predictor = source_predictors[k];
            DataUpdate sdu = data_update(source_predictors[k],
                                         sources[k].observations.row(t - 1).transpose(),
                                         sources[k].model.C, sources[k].model.v_half);
            if (sdu.empty_polytope) {
                ++out.sources[k].empty_data_updates;
                if (policy == EmptyPolicy::DiscardRun) {
                    out.sources[k].discarded = true;
                    out.target.discarded = true;
                    return out;
                }
            }
            sstate.posterior = sdu.posterior;
            out.sources[k].steps.push_back(sstate);
            source_posteriors.push_back(sdu.posterior);
        }

        // III. local time updates
        if (t < horizon) {
            Eigen::VectorXd u = inputs.row(t - 1).transpose();
            target_predictor = time_update(tdu.posterior, target.model, u);
            for (size_t k = 0; k < sources.size(); ++k)
                source_predictors[k] = time_update(source_posteriors[k], sources[k].model, u);
        }
    }
    return out;
}

std::string source_predictor_csv_row(const SourcePredictor& sp) {
    std::string row = sp.source_id + "," + std::to_string(sp.time_index);
    char buf[32];
    for (Eigen::Index i = 0; i < sp.support.dim(); ++i) {
        std::snprintf(buf, sizeof(buf), ",%.17g", sp.support.lower(i));
        row += buf;
    }
    for (Eigen::Index i = 0; i < sp.support.dim(); ++i) {
        std::snprintf(buf, sizeof(buf), ",%.17g", sp.support.upper(i));
        row += buf;
    }
    return row;
}

}  // namespace lsu
