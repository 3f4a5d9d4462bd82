#include <random>

#include "doctest.h"
#include "lsu/bcm.hpp"
#include "lsu/synthesis.hpp"

using namespace lsu;

namespace {

Orthotope unit2() { return {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)}; }

}  // namespace

TEST_CASE("bcm_data_update single channel equals data_update") {
    Eigen::MatrixXd C(1, 2);
    C << 1, 1;
    ChannelModel ch{C, Eigen::VectorXd::Constant(1, 0.1)};
    Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 0.5);
    auto lone = data_update(unit2(), y, C, ch.v_half);
    auto joint = bcm_data_update(unit2(), {{y, ch}});
    CHECK(joint.posterior == lone.posterior);
    CHECK(joint.empty_polytope == lone.empty_polytope);
}

TEST_CASE("duplicate channel with identical datum changes nothing") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int it = 0; it < 300; ++it) {
        Eigen::MatrixXd C(1, 2);
        C << U(rng), U(rng);
        ChannelModel ch{C, Eigen::VectorXd::Constant(1, 0.05 + std::abs(U(rng)))};
        Eigen::VectorXd y = Eigen::VectorXd::Constant(1, U(rng) * 0.5);
        auto once = bcm_data_update(unit2(), {{y, ch}});
        auto twice = bcm_data_update(unit2(), {{y, ch}, {y, ch}});
        if (once.empty_polytope) continue;
        CHECK((once.posterior.lower - twice.posterior.lower).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((once.posterior.upper - twice.posterior.upper).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("disjoint channel strips empty the polytope") {
    Eigen::MatrixXd C(1, 2);
    C << 1, 0;
    ChannelModel ch{C, Eigen::VectorXd::Constant(1, 0.1)};
    auto r = bcm_data_update(unit2(), {{Eigen::VectorXd::Constant(1, 0.2), ch},
                                       {Eigen::VectorXd::Constant(1, 0.9), ch}});
    CHECK(r.empty_polytope);
    CHECK(r.posterior == unit2());  // prior returned unchanged
}

TEST_CASE("axis-aligned channels are order-insensitive") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::MatrixXd C0(1, 2), C1(1, 2);
    C0 << 1, 0;
    C1 << 0, 1;
    for (int it = 0; it < 300; ++it) {
        ChannelModel a{C0, Eigen::VectorXd::Constant(1, 0.05 + std::abs(U(rng)))};
        ChannelModel b{C1, Eigen::VectorXd::Constant(1, 0.05 + std::abs(U(rng)))};
        Eigen::VectorXd ya = Eigen::VectorXd::Constant(1, 0.5 + 0.3 * U(rng));
        Eigen::VectorXd yb = Eigen::VectorXd::Constant(1, 0.5 + 0.3 * U(rng));
        auto fwd = bcm_data_update(unit2(), {{ya, a}, {yb, b}});
        auto bwd = bcm_data_update(unit2(), {{yb, b}, {ya, a}});
        CHECK(fwd.empty_polytope == bwd.empty_polytope);
        if (fwd.empty_polytope) continue;
        CHECK((fwd.posterior.lower - bwd.posterior.lower).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((fwd.posterior.upper - bwd.posterior.upper).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("run_bcm with one channel equals run_isolated") {
    LsuModel m = builtin_systems().system2;
    m.w_half = Eigen::Vector2d(1e-5, 1e-5);
    m.v_half = Eigen::VectorXd::Constant(1, 1e-3);
    std::vector<ChannelModel> channels{{m.C, m.v_half}};
    Trajectory tr = simulate_v(m, channels, 100, {}, 13, Eigen::Vector2d(0, 0));
    Orthotope prior = Orthotope::centered(tr.states.row(0).transpose(), 1.0);
    RunResult iso = run_isolated(m, prior, tr.channel_obs[0], tr.inputs, EmptyPolicy::Skip);
    BcmSystem sys{m.A, m.B, m.w_half, channels};
    RunResult bcm = run_bcm(sys, prior, {tr.channel_obs[0]}, tr.inputs, EmptyPolicy::Skip);
    REQUIRE(iso.steps.size() == bcm.steps.size());
    for (size_t t = 0; t < iso.steps.size(); ++t) {
        CHECK(iso.steps[t].predictor == bcm.steps[t].predictor);
        CHECK(*iso.steps[t].posterior == *bcm.steps[t].posterior);
    }
}

TEST_CASE("extra channels only shrink, containment holds when matched") {
    LsuModel m = builtin_systems().system2;
    m.w_half = Eigen::Vector2d(1e-5, 1e-5);
    m.v_half = Eigen::VectorXd::Constant(1, 1e-3);
    std::vector<ChannelModel> channels{{m.C, m.v_half},
                                       {m.C, Eigen::VectorXd::Constant(1, 1e-4)}};
    Trajectory tr = simulate_v(m, channels, 150, {}, 29, Eigen::Vector2d(0, 0));
    Orthotope prior = Orthotope::centered(tr.states.row(0).transpose(), 1.0);
    RunResult iso = run_isolated(m, prior, tr.channel_obs[0], tr.inputs, EmptyPolicy::Skip);
    BcmSystem sys{m.A, m.B, m.w_half, channels};
    RunResult bcm = run_bcm(sys, prior, {tr.channel_obs[0], tr.channel_obs[1]}, tr.inputs,
                            EmptyPolicy::DiscardRun);
    REQUIRE_FALSE(bcm.discarded);
    for (size_t t = 0; t < bcm.steps.size(); ++t) {
        const Orthotope& joint = *bcm.steps[t].posterior;
        const Orthotope& lone = *iso.steps[t].posterior;
        CHECK((joint.lower.array() >= lone.lower.array() - 1e-12).all());
        CHECK((joint.upper.array() <= lone.upper.array() + 1e-12).all());
        CHECK(contains(joint, tr.states.row(static_cast<Eigen::Index>(t)).transpose()));
    }
}
