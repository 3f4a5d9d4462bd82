#include <random>

#include "doctest.h"
#include "lsu/synthesis.hpp"

using namespace lsu;

TEST_CASE("builtin system matrices") {
    BuiltinSystems sys = builtin_systems();

    CHECK(sys.system2.A(0, 0) == doctest::Approx(0.8144).epsilon(1e-12));
    CHECK(sys.system2.A(0, 1) == doctest::Approx(-0.0905).epsilon(1e-12));
    CHECK(sys.system2.C.rows() == 1);
    CHECK(sys.system2.C(0, 0) == 0.0);
    CHECK(sys.system2.C(0, 1) == 1.0);

    CHECK(sys.system3.nx() == 3);
    CHECK(sys.system3.nu() == 1);
    CHECK(sys.system3.ny() == 2);
    CHECK(sys.system3.C(0, 0) == 1.0);
    CHECK(sys.system3.C(0, 1) == 0.0);
    CHECK(sys.system3.C(0, 2) == 0.5);

    // conjugate pole pair of the second-order system, independent eigen check
    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.system2.A);
    auto ev = es.eigenvalues();
    REQUIRE(ev.size() == 2);
    CHECK(std::abs(ev(0).real() - ev(1).real()) < 1e-9);
    CHECK(std::abs(ev(0).imag() + ev(1).imag()) < 1e-9);
    CHECK(std::abs(ev(0).real()) == doctest::Approx(0.90485).epsilon(1e-3));
    CHECK(std::abs(std::abs(ev(0).imag()) - 0.003) < 5e-4);
}

TEST_CASE("simulate_v basics") {
    LsuModel m;
    m.A = Eigen::Matrix2d::Identity();
    m.B = Eigen::MatrixXd::Zero(2, 1);
    m.C = Eigen::MatrixXd::Identity(2, 2);
    m.w_half = Eigen::Vector2d(1e-300, 1e-300);
    m.v_half = Eigen::Vector2d(1e-300, 1e-300);
    std::vector<ChannelModel> ch{{m.C, m.v_half}};

    SUBCASE("noise-free identity dynamics hold the state") {
        Trajectory tr = simulate_v(m, ch, 10, {}, 1, Eigen::Vector2d(1, 0));
        for (int t = 0; t < 10; ++t) {
            CHECK(tr.states(t, 0) == doctest::Approx(1.0));
            CHECK(tr.states(t, 1) == doctest::Approx(0.0));
            CHECK(tr.channel_obs[0](t, 0) == doctest::Approx(1.0));
        }
    }
    SUBCASE("fixed seed is reproducible byte-for-byte") {
        LsuModel n = builtin_systems().system2;
        n.w_half = Eigen::Vector2d(1e-3, 1e-3);
        n.v_half = Eigen::VectorXd::Constant(1, 1e-2);
        std::vector<ChannelModel> ch2{{n.C, n.v_half}, {n.C, n.v_half}};
        Trajectory a = simulate_v(n, ch2, 50, {}, 42, Eigen::Vector2d(0, 0));
        Trajectory b = simulate_v(n, ch2, 50, {}, 42, Eigen::Vector2d(0, 0));
        CHECK(a.states == b.states);
        CHECK(a.inputs == b.inputs);
        for (size_t i = 0; i < a.channel_obs.size(); ++i)
            CHECK(a.channel_obs[i] == b.channel_obs[i]);
        Trajectory c = simulate_v(n, ch2, 50, {}, 43, Eigen::Vector2d(0, 0));
        CHECK(a.states != c.states);
    }
}

TEST_CASE("observation noise is uniform on the closed box") {
    LsuModel m;
    m.A = Eigen::MatrixXd::Identity(1, 1);
    m.B = Eigen::MatrixXd::Zero(1, 1);
    m.C = Eigen::MatrixXd::Identity(1, 1);
    m.w_half = Eigen::VectorXd::Constant(1, 1e-300);
    const double vbar = 0.25;
    m.v_half = Eigen::VectorXd::Constant(1, vbar);
    std::vector<ChannelModel> ch{{m.C, m.v_half}};
    // x stays at 0, so y is the raw noise draw
    double max_abs = 0.0, sum = 0.0, sum_sq = 0.0;
    const int horizon = 100000;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Trajectory tr = simulate_v(m, ch, horizon, {}, seed, Eigen::VectorXd::Zero(1));
        for (int t = 0; t < horizon; ++t) {
            double v = tr.channel_obs[0](t, 0);
            max_abs = std::max(max_abs, std::abs(v));
            sum += v;
            sum_sq += v * v;
        }
    }
    const double n = 10.0 * horizon;
    CHECK(max_abs <= vbar);
    CHECK(max_abs >= 0.999 * vbar);
    CHECK(std::abs(sum / n) < 1e-3);
    CHECK(sum_sq / n == doctest::Approx(vbar * vbar / 3.0).epsilon(0.01));
}

TEST_CASE("channel noises are mutually independent") {
    LsuModel m;
    m.A = Eigen::MatrixXd::Identity(1, 1);
    m.B = Eigen::MatrixXd::Zero(1, 1);
    m.C = Eigen::MatrixXd::Identity(1, 1);
    m.w_half = Eigen::VectorXd::Constant(1, 1e-300);
    m.v_half = Eigen::VectorXd::Constant(1, 1.0);
    std::vector<ChannelModel> ch{{m.C, m.v_half}, {m.C, m.v_half}};
    Trajectory tr = simulate_v(m, ch, 200000, {}, 3, Eigen::VectorXd::Zero(1));
    double c01 = (tr.channel_obs[0].col(0).array() * tr.channel_obs[1].col(0).array()).mean();
    double v0 = tr.channel_obs[0].col(0).array().square().mean();
    double v1 = tr.channel_obs[1].col(0).array().square().mean();
    CHECK(std::abs(c01 / std::sqrt(v0 * v1)) < 0.01);
}

TEST_CASE("simulate_u interaction noise") {
    LsuModel m = builtin_systems().system2;
    const double wbar = 1e-2;
    m.w_half = Eigen::Vector2d(wbar, wbar);
    m.v_half = Eigen::VectorXd::Constant(1, 1e-3);
    std::vector<ChannelModel> ch{{m.C, m.v_half}, {m.C, m.v_half}};

    SUBCASE("alpha = 0 reduces to the common path") {
        Trajectory tr = simulate_u(m, 0.0, ch, 100, {}, 7, Eigen::Vector2d(0, 0));
        REQUIRE(tr.source_states.has_value());
        CHECK((tr.states - *tr.source_states).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("alpha = 0.4 bounds the offset by alpha * w_half") {
        const double alpha = 0.4;
        double max_e = 0.0, sum_sq = 0.0;
        long n = 0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            Trajectory tr = simulate_u(m, alpha, ch, 5000, {}, seed, Eigen::Vector2d(0, 0));
            REQUIRE(tr.source_states.has_value());
            Eigen::MatrixXd e = tr.states - *tr.source_states;
            max_e = std::max(max_e, e.cwiseAbs().maxCoeff());
            sum_sq += e.array().square().sum();
            n += e.size();
        }
        CHECK(max_e <= alpha * wbar + 1e-15);
        // variance of U(-a, a) is a^2 / 3
        const double want = alpha * alpha * wbar * wbar / 3.0;
        CHECK(sum_sq / static_cast<double>(n) == doctest::Approx(want).epsilon(0.05));
    }
    SUBCASE("channel 0 observes the target path, channel 1 the source path") {
        LsuModel quiet = m;
        quiet.v_half = Eigen::VectorXd::Constant(1, 1e-300);
        std::vector<ChannelModel> qch{{quiet.C, quiet.v_half}, {quiet.C, quiet.v_half}};
        Trajectory tr = simulate_u(quiet, 0.4, qch, 50, {}, 11, Eigen::Vector2d(0, 0));
        for (int t = 0; t < 50; ++t) {
            CHECK(tr.channel_obs[0](t, 0) ==
                  doctest::Approx((quiet.C * tr.states.row(t).transpose())(0)));
            CHECK(tr.channel_obs[1](t, 0) ==
                  doctest::Approx((quiet.C * tr.source_states->row(t).transpose())(0)));
        }
    }
}

TEST_CASE("apply_mismatch spectra") {
    Eigen::MatrixXd A2 = builtin_systems().system2.A;
    Eigen::MatrixXd A3 = builtin_systems().system3.A;

    SUBCASE("zero rotation is the identity") {
        MismatchSpec spec;
        spec.kind = MismatchKind::Rotation;
        spec.angle = 0.0;
        CHECK((apply_mismatch(A2, spec) - A2).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("rotation preserves eigenvalue radii") {
        MismatchSpec spec;
        spec.kind = MismatchKind::Rotation;
        spec.angle = 0.067;
        Eigen::MatrixXd R = apply_mismatch(A2, spec);
        Eigen::EigenSolver<Eigen::MatrixXd> e0(A2), e1(R);
        std::vector<double> r0, r1;
        for (int i = 0; i < 2; ++i) {
            r0.push_back(std::abs(e0.eigenvalues()(i)));
            r1.push_back(std::abs(e1.eigenvalues()(i)));
        }
        std::sort(r0.begin(), r0.end());
        std::sort(r1.begin(), r1.end());
        CHECK(std::abs(r0[0] - r1[0]) < 1e-9);
        CHECK(std::abs(r0[1] - r1[1]) < 1e-9);
        // arguments move by the requested angle
        double a0 = std::abs(std::arg(e0.eigenvalues()(0)));
        double a1 = std::abs(std::arg(e1.eigenvalues()(0)));
        CHECK(std::abs(std::abs(a1 - a0) - 0.067) < 1e-9);
        // result is real
        CHECK(R.allFinite());
    }
    SUBCASE("dilation scales every radius exactly") {
        MismatchSpec spec;
        spec.kind = MismatchKind::Dilation;
        spec.factor = 1.4;
        Eigen::MatrixXd D = apply_mismatch(A3, spec);
        CHECK((D - 1.4 * A3).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::EigenSolver<Eigen::MatrixXd> e0(A3), e1(D);
        std::vector<double> r0, r1;
        for (int i = 0; i < 3; ++i) {
            r0.push_back(std::abs(e0.eigenvalues()(i)));
            r1.push_back(std::abs(e1.eigenvalues()(i)));
        }
        std::sort(r0.begin(), r0.end());
        std::sort(r1.begin(), r1.end());
        for (int i = 0; i < 3; ++i) CHECK(r1[static_cast<size_t>(i)] ==
                                          doctest::Approx(1.4 * r0[static_cast<size_t>(i)]).epsilon(1e-9));
    }
    SUBCASE("radial shift moves one real eigenvalue") {
        MismatchSpec spec;
        spec.kind = MismatchKind::RadialShift;
        spec.eigen_index = 1;
        spec.factor = 1.2;
        Eigen::MatrixXd S = apply_mismatch(A3, spec);
        Eigen::EigenSolver<Eigen::MatrixXd> e0(A3), e1(S);
        std::vector<double> r0, r1;
        for (int i = 0; i < 3; ++i) {
            r0.push_back(e0.eigenvalues()(i).real());
            r1.push_back(e1.eigenvalues()(i).real());
        }
        std::sort(r0.begin(), r0.end());
        std::sort(r1.begin(), r1.end());
        CHECK(r1[0] == doctest::Approx(r0[0]).epsilon(1e-9));
        CHECK(r1[2] == doctest::Approx(r0[2]).epsilon(1e-9));
        CHECK(r1[1] == doctest::Approx(1.2 * r0[1]).epsilon(1e-9));
    }
    SUBCASE("state_noise and none leave A untouched") {
        MismatchSpec none;
        CHECK(apply_mismatch(A3, none) == A3);
        MismatchSpec sn;
        sn.kind = MismatchKind::StateNoise;
        sn.alpha = 0.4;
        CHECK(apply_mismatch(A3, sn) == A3);
    }
}

TEST_CASE("trajectory CSV round trip") {
    LsuModel m = builtin_systems().system3;
    m.w_half = Eigen::Vector3d(1e-3, 1e-3, 1e-3);
    m.v_half = Eigen::Vector2d(1e-2, 1e-2);
    std::vector<ChannelModel> ch{{m.C, m.v_half}};
    InputGenerator gen;
    gen.kind = InputGenerator::Kind::Step;
    gen.amplitude = 0.5;
    Trajectory tr = simulate_v(m, ch, 25, gen, 19, Eigen::Vector3d(0, 0, 0));
    std::string csv = trajectory_to_csv(tr);
    Trajectory back = trajectory_from_csv(csv, 3, 1, {2});
    CHECK((tr.states - back.states).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((tr.inputs - back.inputs).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((tr.channel_obs[0] - back.channel_obs[0]).cwiseAbs().maxCoeff() < 1e-14);
}
