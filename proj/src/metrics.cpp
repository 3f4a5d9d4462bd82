#include "lsu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lsu {

namespace {

void check_window(Window w, size_t available, const char* who) {
    if (w.t_lo < 1 || w.t_lo > w.t_hi)
        throw std::invalid_argument(std::string(who) + ": invalid window");
    if (static_cast<size_t>(w.t_hi) > available)
        throw std::invalid_argument(std::string(who) + ": window exceeds sequence length");
}

}  // namespace

double tnse(const std::vector<Eigen::VectorXd>& estimates,
            const std::vector<Eigen::VectorXd>& truths, Window w) {
    check_window(w, std::min(estimates.size(), truths.size()), "tnse");
    double acc = 0.0;
    for (int t = w.t_lo; t <= w.t_hi; ++t)
        acc += (estimates[t - 1] - truths[t - 1]).squaredNorm();
    return acc;
}

double av(const std::vector<Orthotope>& posteriors, Window w) {
    check_window(w, posteriors.size(), "av");
    double acc = 0.0;
    for (int t = w.t_lo; t <= w.t_hi; ++t) acc += volume(posteriors[t - 1]);
    return acc / w.length();
}

double avr(const std::vector<double>& with_transfer,
           const std::vector<double>& isolated, Window w) {
    check_window(w, std::min(with_transfer.size(), isolated.size()), "avr");
    double acc = 0.0;
    for (int t = w.t_lo; t <= w.t_hi; ++t) {
        if (isolated[t - 1] == 0.0)
            throw std::invalid_argument("avr: isolated volume is zero at t=" + std::to_string(t));
        acc += with_transfer[t - 1] / isolated[t - 1];
    }
    return acc / w.length();
}

double containment(const std::vector<Orthotope>& posteriors,
                   const std::vector<Eigen::VectorXd>& truths, Window w) {
    check_window(w, std::min(posteriors.size(), truths.size()), "containment");
    int hits = 0;
    for (int t = w.t_lo; t <= w.t_hi; ++t)
        if (contains(posteriors[t - 1], truths[t - 1])) ++hits;
    return static_cast<double>(hits) / w.length();
}

const char* const kMetricsCsvHeader =
    "method,ratio,seed,t_lo,t_hi,tnse,av,avr,p_c,discarded,empty_data_updates,empty_transfers";

std::string metrics_csv_row(const MetricsRecord& r) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%llu,%d,%d,%.17g,%.17g,%.17g,%.17g,%d,%d,%d",
                  r.method.c_str(), r.ratio, static_cast<unsigned long long>(r.seed),
                  r.window.t_lo, r.window.t_hi, r.tnse, r.av, r.avr, r.p_c,
                  r.discarded ? 1 : 0, r.empty_data_updates, r.empty_transfers);
    return buf;
}

MetricsRecord aggregate_mean(std::vector<MetricsRecord> rows) {
    if (rows.empty()) throw std::invalid_argument("aggregate_mean: no rows");
    std::sort(rows.begin(), rows.end(),
              [](const MetricsRecord& a, const MetricsRecord& b) { return a.seed < b.seed; });
    MetricsRecord out = rows.front();
    out.seed = 0;
    out.tnse = out.av = out.avr = out.p_c = 0.0;
    out.discarded = false;
    out.empty_data_updates = 0;
    out.empty_transfers = 0;
    int n = 0;
    for (const auto& r : rows) {
        out.empty_data_updates += r.empty_data_updates;
        out.empty_transfers += r.empty_transfers;
        if (r.discarded) continue;
        out.tnse += r.tnse;
        out.av += r.av;
        out.avr += r.avr;
        out.p_c += r.p_c;
        ++n;
    }
    if (n == 0) {
        out.discarded = true;
        out.tnse = out.av = out.avr = out.p_c = std::nan("");
        return out;
    }
    out.tnse /= n;
    out.av /= n;
    out.avr /= n;
    out.p_c /= n;
    return out;
}

}  // namespace lsu
