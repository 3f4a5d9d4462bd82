#include "lsu/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace lsu {

const char* const kVersion = "lsu-uos 0.1.0";

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t run_seed(std::uint64_t master, int run_index) {
    return splitmix64(master ^ (static_cast<std::uint64_t>(run_index) * 0x9E3779B97F4A7C15ull));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string matrix_to_string(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) out += "; ";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += " ";
            out += fmt(m(i, j));
        }
    }
    return out;
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string rowtxt;
    while (std::getline(in, rowtxt, ';')) {
        std::istringstream rs(rowtxt);
        std::vector<double> row;
        double v;
        while (rs >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("empty matrix literal");
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::invalid_argument("ragged matrix literal");
        for (size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

std::string mismatch_to_string(const MismatchSpec& m) {
    switch (m.kind) {
        case MismatchKind::None: return "none";
        case MismatchKind::Rotation: return "rotation " + fmt(m.angle);
        case MismatchKind::Dilation: return "dilation " + fmt(m.factor);
        case MismatchKind::RadialShift:
            return "radial_shift " + std::to_string(m.eigen_index) + " " + fmt(m.factor);
        case MismatchKind::StateNoise: return "state_noise " + fmt(m.alpha);
    }
    return "none";
}

std::string input_gen_to_string(const InputGenerator& g) {
    switch (g.kind) {
        case InputGenerator::Kind::Zero: return "zero";
        case InputGenerator::Kind::Step: return "step " + fmt(g.amplitude);
        case InputGenerator::Kind::UniformRandom:
            return "uniform-random " + fmt(g.lo) + " " + fmt(g.hi);
    }
    return "zero";
}

LsuModel base_model(const ExperimentConfig& cfg) {
    LsuModel m;
    if (cfg.system == "system2") {
        m = builtin_systems().system2;
    } else if (cfg.system == "system3") {
        m = builtin_systems().system3;
    } else if (cfg.system == "inline" && cfg.inline_model) {
        m = *cfg.inline_model;
    } else {
        throw std::invalid_argument("unknown system: " + cfg.system);
    }
    m.A *= cfg.synth_scale;
    return m;
}

struct CellResult {
    MetricsRecord iso, btl, bcm;
    double sec_iso = 0, sec_btl = 0, sec_bcm = 0;
};

std::vector<Eigen::VectorXd> truths_of(const Trajectory& tr) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<size_t>(tr.states.rows()));
    for (Eigen::Index t = 0; t < tr.states.rows(); ++t)
        out.push_back(tr.states.row(t).transpose());
    return out;
}

void fill_metrics(MetricsRecord& rec, const RunResult& run,
                  const std::vector<Eigen::VectorXd>& truths,
                  const std::vector<double>* iso_volumes, Window w) {
    rec.discarded = rec.discarded || run.discarded;
    rec.empty_data_updates = run.empty_data_updates;
    if (rec.discarded) {
        rec.tnse = rec.av = rec.avr = rec.p_c = std::nan("");
        return;
    }
    std::vector<Eigen::VectorXd> estimates;
    std::vector<Orthotope> posteriors;
    std::vector<double> vols;
    estimates.reserve(run.steps.size());
    posteriors.reserve(run.steps.size());
    for (const auto& st : run.steps) {
        posteriors.push_back(*st.posterior);
        estimates.push_back(st.posterior->midpoint());
        vols.push_back(volume(*st.posterior));
    }
    rec.tnse = tnse(estimates, truths, w);
    rec.av = av(posteriors, w);
    rec.p_c = containment(posteriors, truths, w);
    rec.avr = iso_volumes ? avr(vols, *iso_volumes, w) : 1.0;
}

CellResult run_cell(const ExperimentConfig& cfg, double ratio, int run_index) {
    using clock = std::chrono::steady_clock;
    const LsuModel synth = [&] {
        LsuModel m = base_model(cfg);
        m.w_half = Eigen::VectorXd::Constant(m.nx(), cfg.rho);
        m.v_half = Eigen::VectorXd::Constant(m.ny(), cfg.r);
        return m;
    }();
    const double r_s = ratio * cfg.r;

    std::vector<ChannelModel> channels;
    channels.push_back({synth.C, synth.v_half});
    for (int k = 0; k < cfg.n_sources; ++k)
        channels.push_back({synth.C, Eigen::VectorXd::Constant(synth.ny(), r_s)});

    const std::uint64_t seed = run_seed(cfg.master_seed, run_index);
    const Eigen::VectorXd x1 = Eigen::VectorXd::Zero(synth.nx());
    Trajectory tr = (cfg.synthesis_graph == 'U')
                        ? simulate_u(synth, cfg.alpha, channels, cfg.horizon, cfg.input_gen,
                                     seed, x1)
                        : simulate_v(synth, channels, cfg.horizon, cfg.input_gen, seed, x1);

    LsuModel target_anal = synth;
    target_anal.A = apply_mismatch(synth.A, cfg.mismatch);
    LsuModel source_anal = synth;  // sources are matched experts
    source_anal.v_half = Eigen::VectorXd::Constant(synth.ny(), r_s);

    const Eigen::VectorXd target_x1 = tr.states.row(0).transpose();
    const Eigen::VectorXd source_x1 =
        tr.source_states ? tr.source_states->row(0).transpose() : target_x1;
    const Orthotope target_prior = Orthotope::centered(target_x1, cfg.prior_halfwidth);
    const Orthotope source_prior = Orthotope::centered(source_x1, cfg.prior_halfwidth);

    const Window w{cfg.t_lo, cfg.horizon};
    const auto truths = truths_of(tr);

    CellResult cell;
    for (MetricsRecord* rec : {&cell.iso, &cell.btl, &cell.bcm}) {
        rec->ratio = ratio;
        rec->seed = seed;
        rec->window = w;
    }
    cell.iso.method = "isolated";
    cell.btl.method = "btl";
    cell.bcm.method = "bcm";

    // isolated target
    auto t0 = clock::now();
    RunResult iso = run_isolated(target_anal, target_prior, tr.channel_obs[0], tr.inputs,
                                 cfg.empty_policy);
    cell.sec_iso = std::chrono::duration<double>(clock::now() - t0).count();
    fill_metrics(cell.iso, iso, truths, nullptr, w);

    std::vector<double> iso_vols;
    if (!iso.discarded)
        for (const auto& st : iso.steps) iso_vols.push_back(volume(*st.posterior));

    // FPD-BTL
    t0 = clock::now();
    BtlTask target_task{target_anal, target_prior, tr.channel_obs[0]};
    std::vector<BtlTask> source_tasks;
    source_tasks.reserve(static_cast<size_t>(cfg.n_sources));
    for (int k = 0; k < cfg.n_sources; ++k)
        source_tasks.push_back({source_anal, source_prior, tr.channel_obs[static_cast<size_t>(k) + 1]});
    BtlResult btl = run_btl(target_task, source_tasks, tr.inputs, cfg.empty_policy);
    cell.sec_btl = std::chrono::duration<double>(clock::now() - t0).count();
    cell.btl.empty_transfers = btl.empty_transfers;
    cell.btl.discarded = iso.discarded;  // paired AVR needs the isolated run
    fill_metrics(cell.btl, btl.target, truths, iso.discarded ? nullptr : &iso_vols, w);

    // BCM
    t0 = clock::now();
    BcmSystem bcm_sys{target_anal.A, target_anal.B, target_anal.w_half, channels};
    std::vector<Eigen::MatrixXd> obs(tr.channel_obs.begin(), tr.channel_obs.end());
    RunResult bcm = run_bcm(bcm_sys, target_prior, obs, tr.inputs, cfg.empty_policy);
    cell.sec_bcm = std::chrono::duration<double>(clock::now() - t0).count();
    cell.bcm.discarded = iso.discarded;
    fill_metrics(cell.bcm, bcm, truths, iso.discarded ? nullptr : &iso_vols, w);

    return cell;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error("invalid config:\n  " + [&] {
          std::string s;
          for (size_t i = 0; i < v.size(); ++i) s += (i ? "\n  " : "") + v[i];
          return s;
      }()),
      violations(std::move(v)) {}

std::vector<std::string> ExperimentConfig::validate() const {
    std::vector<std::string> bad;
    if (experiment_id != "custom" &&
        (experiment_id.size() != 1 || experiment_id[0] < '1' || experiment_id[0] > '5'))
        bad.push_back("experiment_id must be 1..5 or custom");
    if (system != "system2" && system != "system3" && system != "inline")
        bad.push_back("system must be system2, system3 or inline");
    if (system == "inline" && !inline_model)
        bad.push_back("system=inline requires A, B and C matrices");
    if (n_sources < 0) bad.push_back("n_sources must be >= 0");
    if (ratios.empty()) bad.push_back("ratios must be non-empty");
    for (double x : ratios)
        if (!(x > 0.0)) { bad.push_back("ratios must all be positive"); break; }
    if (!(r > 0.0)) bad.push_back("r must be positive");
    if (!(rho > 0.0)) bad.push_back("rho must be positive");
    if (horizon < 1) bad.push_back("horizon must be >= 1");
    if (t_lo < 1 || t_lo > horizon) bad.push_back("t_lo must satisfy 1 <= t_lo <= horizon");
    if (mc_runs < 1) bad.push_back("mc_runs must be >= 1");
    if (synthesis_graph != 'V' && synthesis_graph != 'U')
        bad.push_back("synthesis_graph must be V or U");
    if (alpha < 0.0) bad.push_back("alpha must be >= 0");
    if (!(prior_halfwidth > 0.0)) bad.push_back("prior_halfwidth must be positive");
    if (!(synth_scale > 0.0)) bad.push_back("synth_scale must be positive");
    if ((mismatch.kind == MismatchKind::Dilation ||
         mismatch.kind == MismatchKind::RadialShift) &&
        !(mismatch.factor > 0.0))
        bad.push_back("mismatch factor must be positive");
    return bad;
}

std::string ExperimentConfig::echo() const {
    std::ostringstream out;
    out << "experiment_id = " << experiment_id << "\n";
    out << "system = " << system << "\n";
    if (inline_model) {
        out << "A = " << matrix_to_string(inline_model->A) << "\n";
        out << "B = " << matrix_to_string(inline_model->B) << "\n";
        out << "C = " << matrix_to_string(inline_model->C) << "\n";
    }
    out << "n_sources = " << n_sources << "\n";
    out << "ratios = ";
    for (size_t i = 0; i < ratios.size(); ++i) out << (i ? "," : "") << fmt(ratios[i]);
    out << "\n";
    out << "r = " << fmt(r) << "\n";
    out << "rho = " << fmt(rho) << "\n";
    out << "horizon = " << horizon << "\n";
    out << "t_lo = " << t_lo << "\n";
    out << "mc_runs = " << mc_runs << "\n";
    out << "mismatch = " << mismatch_to_string(mismatch) << "\n";
    out << "synthesis_graph = " << synthesis_graph << "\n";
    out << "alpha = " << fmt(alpha) << "\n";
    out << "prior_halfwidth = " << fmt(prior_halfwidth) << "\n";
    out << "input_gen = " << input_gen_to_string(input_gen) << "\n";
    out << "empty_policy = "
        << (empty_policy == EmptyPolicy::Skip ? "skip" : "discard-run") << "\n";
    out << "master_seed = " << master_seed << "\n";
    out << "synth_scale = " << fmt(synth_scale) << "\n";
    return out.str();
}

ExperimentConfig preset(int experiment_id) {
    ExperimentConfig cfg;
    cfg.experiment_id = std::to_string(experiment_id);
    switch (experiment_id) {
        case 1:
            cfg.system = "system2";
            cfg.rho = 1e-5;
            cfg.r = 1e-3;
            cfg.t_lo = 1;
            cfg.horizon = 50;
            cfg.mc_runs = 500;
            cfg.n_sources = 1;  // sweep 1,10,100,1000 by overriding n_sources
            break;
        case 2:
            cfg.system = "system2";
            cfg.rho = 1e-5;
            cfg.r = 1e-3;
            cfg.t_lo = 2000;
            cfg.horizon = 4000;
            cfg.mc_runs = 50;
            break;
        case 3:
            cfg.system = "system2";
            cfg.rho = 1e-5;
            cfg.r = 1e-3;
            cfg.t_lo = 2000;
            cfg.horizon = 4000;
            cfg.mc_runs = 50;
            cfg.mismatch.kind = MismatchKind::Rotation;
            cfg.mismatch.angle = 0.067;
            break;
        case 4:
            cfg.system = "system3";
            cfg.rho = 1e-5;
            cfg.r = 1e-3;
            cfg.t_lo = 200;
            cfg.horizon = 400;
            cfg.mc_runs = 500;
            cfg.mismatch.kind = MismatchKind::Dilation;
            cfg.mismatch.factor = 1.4;
            break;
        case 5:
            cfg.system = "system3";
            cfg.synth_scale = 1.4;
            cfg.rho = 1e-2;
            cfg.r = 1e-3;
            cfg.t_lo = 50;
            cfg.horizon = 400;
            cfg.mc_runs = 200;
            cfg.synthesis_graph = 'U';
            cfg.alpha = 0.4;
            cfg.mismatch.kind = MismatchKind::StateNoise;
            cfg.mismatch.alpha = 0.4;
            break;
        default:
            throw std::invalid_argument("preset: experiment id must be 1..5");
    }
    return cfg;
}

void apply_scale(ExperimentConfig& cfg, int k) {
    if (k <= 1) return;
    cfg.mc_runs = std::max(1, cfg.mc_runs / k);
    int scaled_horizon = std::max(1, cfg.horizon / k);
    cfg.horizon = std::max(std::min(cfg.horizon, 50), scaled_horizon);
    cfg.t_lo = std::min(std::max(1, cfg.t_lo / k), cfg.horizon);
}

ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base) {
    ExperimentConfig cfg = std::move(base);
    std::vector<std::string> bad;
    std::istringstream in(text);
    std::string line;
    Eigen::MatrixXd A, B, C;
    bool has_a = false, has_b = false, has_c = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos) {
            bad.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "experiment_id") cfg.experiment_id = val;
            else if (key == "system") cfg.system = val;
            else if (key == "A") { A = parse_matrix(val); has_a = true; }
            else if (key == "B") { B = parse_matrix(val); has_b = true; }
            else if (key == "C") { C = parse_matrix(val); has_c = true; }
            else if (key == "n_sources") cfg.n_sources = std::stoi(val);
            else if (key == "ratios") {
                cfg.ratios.clear();
                std::istringstream rs(val);
                std::string cell;
                while (std::getline(rs, cell, ',')) cfg.ratios.push_back(std::stod(cell));
            }
            else if (key == "r") cfg.r = std::stod(val);
            else if (key == "rho") cfg.rho = std::stod(val);
            else if (key == "horizon") cfg.horizon = std::stoi(val);
            else if (key == "t_lo") cfg.t_lo = std::stoi(val);
            else if (key == "mc_runs") cfg.mc_runs = std::stoi(val);
            else if (key == "mismatch") {
                for (char& c : val)
                    if (c == '(' || c == ')' || c == ',') c = ' ';
                std::istringstream ms(val);
                std::string kind;
                ms >> kind;
                if (kind == "none") cfg.mismatch = {};
                else if (kind == "rotation") {
                    cfg.mismatch = {};
                    cfg.mismatch.kind = MismatchKind::Rotation;
                    ms >> cfg.mismatch.angle;
                } else if (kind == "dilation") {
                    cfg.mismatch = {};
                    cfg.mismatch.kind = MismatchKind::Dilation;
                    ms >> cfg.mismatch.factor;
                } else if (kind == "radial_shift") {
                    cfg.mismatch = {};
                    cfg.mismatch.kind = MismatchKind::RadialShift;
                    ms >> cfg.mismatch.eigen_index >> cfg.mismatch.factor;
                } else if (kind == "state_noise") {
                    cfg.mismatch = {};
                    cfg.mismatch.kind = MismatchKind::StateNoise;
                    ms >> cfg.mismatch.alpha;
                    cfg.alpha = cfg.mismatch.alpha;
                } else {
                    bad.push_back("mismatch: unknown kind '" + kind + "'");
                }
                if (ms.fail() && kind != "none")
                    bad.push_back("mismatch: malformed parameters");
            }
            else if (key == "synthesis_graph") {
                if (val != "V" && val != "U") bad.push_back("synthesis_graph must be V or U");
                else cfg.synthesis_graph = val[0];
            }
            else if (key == "alpha") cfg.alpha = std::stod(val);
            else if (key == "prior_halfwidth") cfg.prior_halfwidth = std::stod(val);
            else if (key == "input_gen") {
                for (char& c : val)
                    if (c == '(' || c == ')' || c == ',') c = ' ';
                std::istringstream gs(val);
                std::string kind;
                gs >> kind;
                if (kind == "zero") cfg.input_gen = {};
                else if (kind == "step") {
                    cfg.input_gen.kind = InputGenerator::Kind::Step;
                    gs >> cfg.input_gen.amplitude;
                } else if (kind == "uniform-random") {
                    cfg.input_gen.kind = InputGenerator::Kind::UniformRandom;
                    gs >> cfg.input_gen.lo >> cfg.input_gen.hi;
                } else {
                    bad.push_back("input_gen: unknown kind '" + kind + "'");
                }
                if (gs.fail() && kind != "zero") bad.push_back("input_gen: malformed parameters");
            }
            else if (key == "empty_policy") {
                if (val == "skip") cfg.empty_policy = EmptyPolicy::Skip;
                else if (val == "discard-run") cfg.empty_policy = EmptyPolicy::DiscardRun;
                else bad.push_back("empty_policy must be skip or discard-run");
            }
            else if (key == "master_seed") cfg.master_seed = std::stoull(val);
            else if (key == "synth_scale") cfg.synth_scale = std::stod(val);
            else bad.push_back("unknown key '" + key + "'");
        } catch (const std::exception& e) {
            bad.push_back(key + ": " + e.what());
        }
    }
    if (has_a || has_b || has_c) {
        if (has_a && has_b && has_c) {
            LsuModel m;
            m.A = A;
            m.B = B;
            m.C = C;
            m.w_half = Eigen::VectorXd::Ones(A.rows());
            m.v_half = Eigen::VectorXd::Ones(C.rows());
            cfg.inline_model = m;
        } else {
            bad.push_back("inline system needs all of A, B, C");
        }
    }
    auto more = cfg.validate();
    bad.insert(bad.end(), more.begin(), more.end());
    if (!bad.empty()) throw ConfigError(std::move(bad));
    return cfg;
}

ResultsTable run_experiment(const ExperimentConfig& cfg, int workers) {
    auto bad = cfg.validate();
    if (!bad.empty()) throw ConfigError(std::move(bad));

    struct Cell {
        size_t ratio_index;
        int run_index;
    };
    std::vector<Cell> cells;
    for (size_t ri = 0; ri < cfg.ratios.size(); ++ri)
        for (int run = 0; run < cfg.mc_runs; ++run) cells.push_back({ri, run});

    std::vector<CellResult> results(cells.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            results[i] = run_cell(cfg, cfg.ratios[cells[i].ratio_index], cells[i].run_index);
        }
    };
    int nthreads = std::max(1, workers);
    if (nthreads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    ResultsTable table;
    table.version = kVersion;
    table.config_echo = cfg.echo();
    table.wall_clock_seconds = {{"isolated", 0.0}, {"btl", 0.0}, {"bcm", 0.0}};
    table.rows.reserve(cells.size() * 3);
    for (size_t i = 0; i < cells.size(); ++i) {
        table.rows.push_back(results[i].iso);
        table.rows.push_back(results[i].btl);
        table.rows.push_back(results[i].bcm);
        table.wall_clock_seconds["isolated"] += results[i].sec_iso;
        table.wall_clock_seconds["btl"] += results[i].sec_btl;
        table.wall_clock_seconds["bcm"] += results[i].sec_bcm;
    }
    return table;
}

std::string results_csv(const ResultsTable& table) {
    std::string out = kMetricsCsvHeader;
    out += "\n";
    for (const auto& row : table.rows) {
        out += metrics_csv_row(row);
        out += "\n";
    }
    return out;
}

namespace {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

std::string svg_plot(const std::string& title, const std::string& ylabel,
                     const std::vector<Series>& series, bool log_y, bool unit_y) {
    const double W = 640, H = 440, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (std::isnan(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (unit_y) { ymin = 0.0; ymax = 1.0; }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double fx = xmin + (xmax - xmin) * i / 4.0;
        double fy = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x=\"" << px(fx) << "\" y=\"" << H - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(std::round(fx * 100) / 100)
            << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(std::round(fy * 100) / 100)
            << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">log10(r_s / r)</text>\n";
    out << "<text x=\"16\" y=\"" << H / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << H / 2
        << ")\">" << ylabel << "</text>\n";
    double ly = mt + 6;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (std::isnan(s.y[i])) continue;
            out << px(s.x[i]) << "," << py(ty(s.y[i])) << " ";
        }
        out << "\"/>\n";
        out << "<text x=\"" << W - mr - 110 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\""
            << s.color << "\">" << s.label << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace

void write_outputs(const ResultsTable& table, const std::string& out_dir, bool csv, bool svg) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + name + " in " + out_dir);
        f << content;
    };
    if (csv) write("results.csv", results_csv(table));

    std::ostringstream meta;
    meta << "version = " << table.version << "\n";
    for (const auto& [method, sec] : table.wall_clock_seconds)
        meta << "wall_clock_" << method << "_seconds = " << fmt(sec) << "\n";
    meta << "\n# config\n" << table.config_echo;
    write("meta.txt", meta.str());

    if (!svg) return;
    // per-(method, ratio) means over seeds
    const std::vector<std::pair<std::string, std::string>> styles = {
        {"isolated", "#777777"}, {"btl", "#d62728"}, {"bcm", "#1f77b4"}};
    auto mean_series = [&](const std::string& method, auto getter) {
        Series s;
        s.label = method;
        std::map<double, std::vector<MetricsRecord>> byratio;
        for (const auto& row : table.rows)
            if (row.method == method) byratio[row.ratio].push_back(row);
        for (auto& [ratio, rows] : byratio) {
            MetricsRecord agg = aggregate_mean(rows);
            s.x.push_back(std::log10(ratio));
            s.y.push_back(getter(agg));
        }
        return s;
    };
    struct Plot {
        const char* file;
        const char* title;
        const char* ylabel;
        bool log_y, unit_y;
        double MetricsRecord::*field;
    };
    const Plot plots[] = {
        {"tnse.svg", "TNSE vs source/target noise ratio", "log10 TNSE", true, false,
         &MetricsRecord::tnse},
        {"av.svg", "Average posterior volume", "log10 AV", true, false, &MetricsRecord::av},
        {"avr.svg", "Average volume ratio", "log10 AVR", true, false, &MetricsRecord::avr},
        {"pc.svg", "Containment probability", "p_c", false, true, &MetricsRecord::p_c},
    };
    for (const auto& p : plots) {
        std::vector<Series> series;
        for (const auto& [method, color] : styles) {
            Series s = mean_series(method, [&](const MetricsRecord& r) { return r.*(p.field); });
            s.color = color;
            series.push_back(std::move(s));
        }
        write(p.file, svg_plot(p.title, p.ylabel, series, p.log_y, p.unit_y));
    }
}

std::string source_trace_csv(const ExperimentConfig& cfg) {
    auto bad = cfg.validate();
    if (!bad.empty()) throw ConfigError(std::move(bad));
    LsuModel synth = base_model(cfg);
    // trace the first (ratio, seed) cell's BTL run
    ExperimentConfig one = cfg;
    one.ratios = {cfg.ratios.front()};
    one.mc_runs = 1;

    const double r_s = one.ratios[0] * one.r;
    synth.w_half = Eigen::VectorXd::Constant(synth.nx(), one.rho);
    synth.v_half = Eigen::VectorXd::Constant(synth.ny(), one.r);
    std::vector<ChannelModel> channels;
    channels.push_back({synth.C, synth.v_half});
    for (int k = 0; k < one.n_sources; ++k)
        channels.push_back({synth.C, Eigen::VectorXd::Constant(synth.ny(), r_s)});
    const std::uint64_t seed = run_seed(one.master_seed, 0);
    const Eigen::VectorXd x1 = Eigen::VectorXd::Zero(synth.nx());
    Trajectory tr = (one.synthesis_graph == 'U')
                        ? simulate_u(synth, one.alpha, channels, one.horizon, one.input_gen,
                                     seed, x1)
                        : simulate_v(synth, channels, one.horizon, one.input_gen, seed, x1);
    LsuModel target_anal = synth;
    target_anal.A = apply_mismatch(synth.A, one.mismatch);
    LsuModel source_anal = synth;
    source_anal.v_half = Eigen::VectorXd::Constant(synth.ny(), r_s);
    const Eigen::VectorXd sx1 =
        tr.source_states ? tr.source_states->row(0).transpose()
                         : Eigen::VectorXd(tr.states.row(0).transpose());
    BtlTask target{target_anal, Orthotope::centered(tr.states.row(0).transpose(),
                                                    one.prior_halfwidth),
                   tr.channel_obs[0]};
    std::vector<BtlTask> sources;
    for (int k = 0; k < one.n_sources; ++k)
        sources.push_back({source_anal, Orthotope::centered(sx1, one.prior_halfwidth),
                           tr.channel_obs[static_cast<size_t>(k) + 1]});
    BtlResult res = run_btl(target, sources, tr.inputs, one.empty_policy);

    std::string out = "source_id,t";
    for (Eigen::Index i = 0; i < synth.nx(); ++i) out += ",lower_" + std::to_string(i + 1);
    for (Eigen::Index i = 0; i < synth.nx(); ++i) out += ",upper_" + std::to_string(i + 1);
    out += "\n";
    for (size_t k = 0; k < res.sources.size(); ++k)
        for (const auto& st : res.sources[k].steps)
            out += source_predictor_csv_row(
                       {st.predictor, "s" + std::to_string(k), st.time_index}) +
                   "\n";
    return out;
}

}  // namespace lsu
