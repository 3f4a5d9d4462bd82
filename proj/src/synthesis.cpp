#include "lsu/synthesis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lsu {

namespace {

void check_channels(const LsuModel& model, const std::vector<ChannelModel>& channels) {
    if (channels.empty()) throw std::invalid_argument("simulate: at least one channel");
    for (const auto& ch : channels)
        if (ch.C.cols() != model.nx())
            throw std::invalid_argument("simulate: channel dimension mismatch");
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t run, std::uint64_t role,
                            std::uint64_t channel) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run),  static_cast<std::uint32_t>(run >> 32),
                      static_cast<std::uint32_t>(role), static_cast<std::uint32_t>(channel)};
    return std::mt19937_64(seq);
}

Eigen::VectorXd uniform_box_draw(std::mt19937_64& rng, const Eigen::VectorXd& halfwidth) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd v(halfwidth.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = unit(rng) * halfwidth(i);
    return v;
}

Eigen::MatrixXd InputGenerator::generate(int horizon, Eigen::Index nu,
                                         std::mt19937_64& rng) const {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(horizon, nu);
    switch (kind) {
        case Kind::Zero:
            break;
        case Kind::Step:
            u.setConstant(amplitude);
            break;
        case Kind::UniformRandom: {
            std::uniform_real_distribution<double> d(lo, hi);
            for (int t = 0; t < horizon; ++t)
                for (Eigen::Index j = 0; j < nu; ++j) u(t, j) = d(rng);
            break;
        }
    }
    return u;
}

Trajectory simulate_v(const LsuModel& model, const std::vector<ChannelModel>& channels,
                      int horizon, const InputGenerator& input_gen, std::uint64_t seed,
                      const Eigen::VectorXd& x1) {
    if (horizon < 1) throw std::invalid_argument("simulate_v: horizon must be >= 1");
    check_channels(model, channels);

    Trajectory tr;
    tr.seed = seed;
    auto w_rng = make_stream(seed, 0, 0);
    auto u_rng = make_stream(seed, 0, 2);
    tr.inputs = input_gen.generate(horizon, model.nu(), u_rng);
    tr.states.resize(horizon, model.nx());

    Eigen::VectorXd x = x1;
    tr.states.row(0) = x.transpose();
    for (int t = 1; t < horizon; ++t) {
        x = model.A * x + model.B * tr.inputs.row(t - 1).transpose() +
            uniform_box_draw(w_rng, model.w_half);
        tr.states.row(t) = x.transpose();
    }

    tr.channel_obs.reserve(channels.size());
    for (size_t i = 0; i < channels.size(); ++i) {
        auto v_rng = make_stream(seed, 0, 3 + i);
        Eigen::MatrixXd y(horizon, channels[i].ny());
        for (int t = 0; t < horizon; ++t)
            y.row(t) = (channels[i].C * tr.states.row(t).transpose() +
                        uniform_box_draw(v_rng, channels[i].v_half))
                           .transpose();
        tr.channel_obs.push_back(std::move(y));
    }
    return tr;
}

Trajectory simulate_u(const LsuModel& model, double alpha,
                      const std::vector<ChannelModel>& channels, int horizon,
                      const InputGenerator& input_gen, std::uint64_t seed,
                      const Eigen::VectorXd& x1) {
    if (horizon < 1) throw std::invalid_argument("simulate_u: horizon must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("simulate_u: alpha must be >= 0");
    check_channels(model, channels);

    Trajectory tr;
    tr.seed = seed;
    auto w_rng = make_stream(seed, 0, 0);
    auto e_rng = make_stream(seed, 0, 1);
    auto u_rng = make_stream(seed, 0, 2);
    tr.inputs = input_gen.generate(horizon, model.nu(), u_rng);
    tr.states.resize(horizon, model.nx());
    Eigen::MatrixXd src(horizon, model.nx());

    Eigen::VectorXd xs = x1;
    src.row(0) = xs.transpose();
    tr.states.row(0) = (xs + uniform_box_draw(e_rng, alpha * model.w_half)).transpose();
    for (int t = 1; t < horizon; ++t) {
        xs = model.A * xs + model.B * tr.inputs.row(t - 1).transpose() +
             uniform_box_draw(w_rng, model.w_half);
        src.row(t) = xs.transpose();
        tr.states.row(t) = (xs + uniform_box_draw(e_rng, alpha * model.w_half)).transpose();
    }
    tr.source_states = std::move(src);

    tr.channel_obs.reserve(channels.size());
    for (size_t i = 0; i < channels.size(); ++i) {
        // channel 0 observes the target path, the rest the source path
        const Eigen::MatrixXd& path = (i == 0) ? tr.states : *tr.source_states;
        auto v_rng = make_stream(seed, 0, 3 + i);
        Eigen::MatrixXd y(horizon, channels[i].ny());
        for (int t = 0; t < horizon; ++t)
            y.row(t) = (channels[i].C * path.row(t).transpose() +
                        uniform_box_draw(v_rng, channels[i].v_half))
                           .transpose();
        tr.channel_obs.push_back(std::move(y));
    }
    return tr;
}

Eigen::MatrixXd apply_mismatch(const Eigen::MatrixXd& A_synth, const MismatchSpec& spec) {
    if (A_synth.rows() != A_synth.cols())
        throw std::invalid_argument("apply_mismatch: A must be square");
    switch (spec.kind) {
        case MismatchKind::None:
        case MismatchKind::StateNoise:  // realized in synthesis, A unchanged
            return A_synth;
        case MismatchKind::Dilation:
            if (!(spec.factor > 0.0))
                throw std::invalid_argument("apply_mismatch: dilation factor must be > 0");
            return spec.factor * A_synth;
        default:
            break;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A_synth);
    if (!lu.isInvertible())
        throw std::invalid_argument("apply_mismatch: A must be invertible");

    Eigen::EigenSolver<Eigen::MatrixXd> es(A_synth);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("apply_mismatch: eigendecomposition failed");
    Eigen::VectorXcd lam = es.eigenvalues();
    const double imag_tol = 1e-12 * A_synth.cwiseAbs().maxCoeff();

    if (spec.kind == MismatchKind::Rotation) {
        bool any_complex = false;
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            if (std::abs(lam(i).imag()) > imag_tol) {
                any_complex = true;
                double sgn = lam(i).imag() > 0.0 ? 1.0 : -1.0;
                lam(i) *= std::polar(1.0, sgn * spec.angle);
            }
        }
        if (!any_complex)
            throw std::invalid_argument(
                "apply_mismatch: rotation requires a complex-conjugate eigenvalue pair");
    } else {  // RadialShift
        if (!(spec.factor > 0.0))
            throw std::invalid_argument("apply_mismatch: radial-shift factor must be > 0");
        std::vector<Eigen::Index> order(static_cast<size_t>(lam.size()));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return lam(a).real() < lam(b).real();
        });
        if (spec.eigen_index < 0 || spec.eigen_index >= static_cast<int>(order.size()))
            throw std::invalid_argument("apply_mismatch: eigenvalue index out of range");
        Eigen::Index sel = order[static_cast<size_t>(spec.eigen_index)];
        std::complex<double> target = lam(sel);
        lam(sel) *= spec.factor;
        if (std::abs(target.imag()) > imag_tol) {
            // scale the conjugate partner too, keeping the spectrum Hermitian
            for (Eigen::Index i = 0; i < lam.size(); ++i) {
                if (i != sel && std::abs(lam(i) - std::conj(target)) < 1e-9)
                    lam(i) *= spec.factor;
            }
        }
    }

    Eigen::MatrixXcd V = es.eigenvectors();
    Eigen::MatrixXcd rec = V * lam.asDiagonal() * V.inverse();
    double residue = rec.imag().cwiseAbs().maxCoeff();
    if (residue > 1e-10)
        throw std::runtime_error("apply_mismatch: imaginary reconstruction residue " +
                                 std::to_string(residue));
    return rec.real();
}

BuiltinSystems builtin_systems() {
    BuiltinSystems s;
    s.system2.A.resize(2, 2);
    s.system2.A << 0.8144, -0.0905, 0.0905, 0.9953;
    s.system2.B.resize(2, 1);
    s.system2.B << 0.0905, 0.0047;
    s.system2.C.resize(1, 2);
    s.system2.C << 0.0, 1.0;
    s.system2.w_half = Eigen::VectorXd::Ones(2);
    s.system2.v_half = Eigen::VectorXd::Ones(1);

    s.system3.A.resize(3, 3);
    s.system3.A << 0.4, -0.3, 0.1, -0.4, 0.4, 0.0, 0.3, 0.2, 0.1;
    s.system3.B.resize(3, 1);
    s.system3.B << 0.1, 0.6, 0.3;
    s.system3.C.resize(2, 3);
    s.system3.C << 1.0, 0.0, 0.5, 0.0, 1.0, 0.5;
    s.system3.w_half = Eigen::VectorXd::Ones(3);
    s.system3.v_half = Eigen::VectorXd::Ones(2);
    return s;
}

std::string trajectory_to_csv(const Trajectory& tr) {
    std::ostringstream out;
    const Eigen::Index nx = tr.states.cols();
    const Eigen::Index nu = tr.inputs.cols();
    out << "t";
    for (Eigen::Index i = 0; i < nx; ++i) out << ",x_" << (i + 1);
    for (Eigen::Index i = 0; i < nu; ++i) out << ",u_" << (i + 1);
    for (size_t c = 0; c < tr.channel_obs.size(); ++c)
        for (Eigen::Index i = 0; i < tr.channel_obs[c].cols(); ++i)
            out << ",y_" << (c + 1) << "_" << (i + 1);
    out << "\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v);
        out << buf;
    };
    for (Eigen::Index t = 0; t < tr.states.rows(); ++t) {
        out << (t + 1);
        for (Eigen::Index i = 0; i < nx; ++i) put(tr.states(t, i));
        for (Eigen::Index i = 0; i < nu; ++i) put(tr.inputs(t, i));
        for (const auto& y : tr.channel_obs)
            for (Eigen::Index i = 0; i < y.cols(); ++i) put(y(t, i));
        out << "\n";
    }
    return out.str();
}

Trajectory trajectory_from_csv(const std::string& csv, Eigen::Index nx, Eigen::Index nu,
                               const std::vector<Eigen::Index>& channel_dims) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("trajectory_from_csv: empty input");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        rows.push_back(std::move(vals));
    }
    Eigen::Index total = 1 + nx + nu;
    for (auto d : channel_dims) total += d;
    Trajectory tr;
    const int horizon = static_cast<int>(rows.size());
    if (horizon < 1) throw std::invalid_argument("trajectory_from_csv: no data rows");
    tr.states.resize(horizon, nx);
    tr.inputs.resize(horizon, nu);
    for (auto d : channel_dims) tr.channel_obs.emplace_back(horizon, d);
    for (int t = 0; t < horizon; ++t) {
        if (static_cast<Eigen::Index>(rows[t].size()) != total)
            throw std::invalid_argument("trajectory_from_csv: column count mismatch");
        Eigen::Index k = 1;
        for (Eigen::Index i = 0; i < nx; ++i) tr.states(t, i) = rows[t][k++];
        for (Eigen::Index i = 0; i < nu; ++i) tr.inputs(t, i) = rows[t][k++];
        for (size_t c = 0; c < channel_dims.size(); ++c)
            for (Eigen::Index i = 0; i < channel_dims[c]; ++i)
                tr.channel_obs[c](t, i) = rows[t][k++];
    }
    return tr;
}

}  // namespace lsu
