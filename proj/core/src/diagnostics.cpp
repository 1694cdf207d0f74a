#include "spn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spn/error.hpp"

namespace spn {

namespace {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    if (x.empty()) return {};
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx <= 0.0) return {my, 0.0};
    const double slope = sxy / sxx;
    return {my - slope * mx, slope};
}

void require_depth(const SimState& state, int c) {
    if (c > state.predraw_depth()) {
        throw Error(ErrorCode::PredrawDepthInsufficient,
                    "counter level " + std::to_string(c) + " exceeds the route pre-draw depth " +
                        std::to_string(state.predraw_depth()));
    }
}

// Total workloads W^_{<=c} for every c in 1..depth from the queue sizes and
// the state's destined-path tally. Row c-1 holds level c.
std::vector<Vector> total_workloads_by_level(const SimState& state, int depth) {
    const auto& net = state.network();
    const int I = net.num_buffers();
    const bool sync = net.spec().synchronized;
    // diff[c][i]: contributions starting at level c (prefix-summed below)
    std::vector<Vector> q(depth + 2, Vector::Zero(I));
    std::vector<Vector> v(depth + 2, Vector::Zero(I));
    for (int i = 0; i < I; ++i) {
        for (const auto& [m, jobs] : state.queues(i)) {
            if (m > depth) break;
            q[m][i] += static_cast<double>(jobs.size());
        }
        for (int r = 2; r <= depth; ++r) q[r][i] += state.destined(r, i);
    }
    Vector v_all = Vector::Zero(I);
    for (int j = 0; j < net.num_activities(); ++j) {
        const auto& slot = state.slot(j);
        if (!slot) continue;
        const double rem = state.remaining(j);
        v_all[slot->job.buffer] += rem;
        if (sync && slot->job.counter <= depth) v[slot->job.counter][slot->job.buffer] += rem;
    }
    std::vector<Vector> out(depth, Vector::Zero(I));
    Vector q_acc = Vector::Zero(I);
    Vector v_acc = Vector::Zero(I);
    for (int c = 1; c <= depth; ++c) {
        q_acc += q[c];
        v_acc += v[c];
        out[c - 1] = net.mean_service().cwiseProduct(q_acc) + (sync ? v_acc : v_all);
    }
    return out;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

Vector immediate_workload(const SimState& state) {
    const auto& net = state.network();
    Vector w(net.num_buffers());
    const auto v = state.in_service_per_buffer();
    for (int i = 0; i < net.num_buffers(); ++i) {
        w[i] = net.mean_service()[i] * state.queue_length(i) + v[i];
    }
    return w;
}

WorkloadView counted_workloads(const SimState& state, int c) {
    require_depth(state, c);
    if (c < 0) throw Error(ErrorCode::ConfigError, "counter level must be >= 0");
    const auto& net = state.network();
    const int I = net.num_buffers();
    WorkloadView out;
    out.counter = c;
    out.q_lt = Vector::Zero(I);
    out.q_le = Vector::Zero(I);
    out.q_hat_le = Vector::Zero(I);
    for (int i = 0; i < I; ++i) {
        for (const auto& [m, jobs] : state.queues(i)) {
            if (m > c) break;
            const auto n = static_cast<double>(jobs.size());
            out.q_le[i] += n;
            if (m < c) out.q_lt[i] += n;
            out.q_hat_le[i] += n;
            for (const Job& job : jobs) {
                for (int r = m + 1; r <= c && r <= static_cast<int>(job.path.size()); ++r) {
                    out.q_hat_le[job.path[r - 1]] += 1.0;
                }
            }
        }
    }
    Vector v = Vector::Zero(I), v_lt = Vector::Zero(I), v_le = Vector::Zero(I);
    for (int j = 0; j < net.num_activities(); ++j) {
        const auto& slot = state.slot(j);
        if (!slot) continue;
        const double rem = state.remaining(j);
        const int i = slot->job.buffer;
        v[i] += rem;
        if (slot->job.counter < c) v_lt[i] += rem;
        if (slot->job.counter <= c) v_le[i] += rem;
    }
    const Vector& m = net.mean_service();
    const bool sync = net.spec().synchronized;
    out.w_lt = m.cwiseProduct(out.q_lt) + (sync ? v_lt : v);
    out.w_le = m.cwiseProduct(out.q_le) + (sync ? v_le : v);
    out.w_hat_le = m.cwiseProduct(out.q_hat_le) + (sync ? v_le : v);
    return out;
}

WeightTable total_weights(const SimState& state, int depth) {
    const auto& net = state.network();
    WeightTable t;
    auto add = [&](JobType type, double w) {
        switch (type) {
            case JobType::Type1: t.m1 += w; break;
            case JobType::Type2: t.m2 += w; break;
            case JobType::Type3: t.m3 += w; break;
        }
    };
    for (int i = 0; i < net.num_buffers(); ++i) {
        const auto& queues = state.queues(i);
        int high = 0;
        for (auto it = queues.upper_bound(depth); it != queues.end(); ++it) high += static_cast<int>(it->second.size());
        t.m1 += high * net.expected_work()[i];
        for (auto it = queues.begin(); it != queues.end() && it->first <= depth; ++it) {
            for (const Job& job : it->second) add(job_type(job, depth), waiting_weight(net, job, depth));
        }
    }
    for (int j = 0; j < net.num_activities(); ++j) {
        const auto& slot = state.slot(j);
        if (!slot) continue;
        add(job_type(slot->job, depth), in_service_weight(net, slot->job, depth, state.remaining(j)));
    }
    return t;
}

Vector activity_remaining(const SimState& state) {
    const int J = state.network().num_activities();
    Vector v(J);
    for (int j = 0; j < J; ++j) v[j] = state.remaining(j);
    return v;
}

GlobalConstants global_constants(const ValidatedNetwork& net, const QuadraticCertificate& cert, std::uint64_t cap) {
    check_matrix(cert.z, net.num_buffers());
    GlobalConstants g;
    const int I = net.num_buffers();
    const int J = net.num_activities();
    const int K = net.num_processors();
    g.epsilon = cert.epsilon;
    g.eta = cert.eta;
    g.c_certificate = cert.c;
    g.beta_min = net.beta_min();
    g.m_min = net.mean_min();
    g.m_max = net.mean_max();

    g.b_renewal = 0.0;
    g.nu = std::numeric_limits<double>::infinity();
    for (int i = 0; i < I; ++i) {
        const auto& s = net.spec().services[i];
        g.b_renewal = std::max(g.b_renewal, s.second_moment() / s.mean());
        g.nu = std::min(g.nu, s.mean() - s.expected_excess(g.beta_min));
    }
    const double t_lower = std::max(std::ceil(2.0 * J * g.b_renewal / g.beta_min + 1.0), 2.0 * g.m_max + 2.0);
    g.t = static_cast<int>(std::floor(t_lower)) + 1;
    g.gamma = cert.epsilon * g.nu / std::ldexp(1.0, K + 2);

    if (const auto depth = net.route_depth()) {
        g.bounded_routes = true;
        g.d = *depth;
    } else {
        if (!(cert.epsilon > 0.0)) {
            throw Error(ErrorCode::SlackNonPositive, "routes are unbounded, so the slack must be positive");
        }
        const double r = net.spectral_radius() + 1e-6;
        if (!(r < 1.0)) throw Error(ErrorCode::TailSeriesDiverges, "spectral radius estimate is not below 1");
        const Matrix pt = net.routing().transpose();
        // a[d] = d * m_max * |(P^T)^d alpha|_1, then a geometric remainder.
        std::vector<double> a{0.0};
        Vector v = net.alpha();
        double remainder = 0.0;
        constexpr int kMaxTerms = 1000000;
        for (int d = 1; d <= kMaxTerms; ++d) {
            v = pt * v;
            const double norm = v.lpNorm<1>();
            a.push_back(d * g.m_max * norm);
            const double dd = static_cast<double>(d);
            remainder = g.m_max * norm * (dd * r / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
            if (norm == 0.0 || g.t * remainder <= g.gamma * 1e-6) break;
        }
        double suffix = remainder;
        g.d = static_cast<int>(a.size());
        for (int x = static_cast<int>(a.size()) - 1; x >= 1; --x) {
            suffix += a[x];
            if (g.t * suffix <= g.gamma) g.d = x;
            else break;
        }
    }
    g.gamma1 = 2.0 * g.gamma / (J * g.b_renewal);
    g.gamma2 = g.m_min * g.gamma;
    g.upsilon = cert.eta * g.m_min;

    double q = 0.0;
    for (const auto& u : enumerate_feasible(net, cap)) q = std::max(q, quadratic(cert.z, drift_vector(net, u, cert.epsilon)));
    g.second_moment_bound = q;
    g.c = std::max(cert.c, 1.0) + q;
    g.xi = g.upsilon * std::pow(g.upsilon / (2.0 * g.c), g.d);
    return g;
}

double eval_global(const SimState& state, const GlobalConstants& g, const QuadraticCertificate& cert) {
    require_depth(state, g.d);
    const auto levels = total_workloads_by_level(state, g.d);
    const double ratio = g.upsilon / (2.0 * g.c);
    double value = 0.0;
    double factor = 1.0;
    for (int c = 1; c <= g.d; ++c) {
        factor *= ratio;
        value += factor * quadratic(cert.z, levels[c - 1]);
    }
    const auto v = state.in_service_per_buffer();
    double v_sq = 0.0, v_abs = 0.0;
    for (double x : v) {
        v_sq += x * x;
        v_abs += x;
    }
    value += 2.0 * g.c / g.beta_min * v_sq;
    if (!g.bounded_routes) {
        const auto w = total_weights(state, g.d);
        const double big_g = w.m1 + w.m2 + g.gamma1 * v_abs;
        value += g.xi / (2.0 * g.c) * big_g * big_g;
    }
    return value;
}

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Diverging: return "diverging";
        case Verdict::BoundedEvidence: return "bounded-evidence";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

Verdict classify(double slope, double middle, double tail, const StabilityOptions& opts) {
    if (slope > opts.slope_threshold) return Verdict::Diverging;
    if (tail < opts.ratio * middle || (tail == 0.0 && middle == 0.0)) return Verdict::BoundedEvidence;
    return Verdict::Inconclusive;
}

}  // namespace

StabilityReport stability_estimate(const std::vector<Trajectory>& trajectories, const StabilityOptions& opts) {
    if (trajectories.empty()) throw Error(ErrorCode::TrajectoryTooShort, "no trajectories");
    StabilityReport report;
    double sum_mid = 0.0, sum_tail = 0.0;
    for (const auto& traj : trajectories) {
        if (traj.rows.size() < 100) {
            throw Error(ErrorCode::TrajectoryTooShort,
                        "trajectory has " + std::to_string(traj.rows.size()) + " samples, need at least 100");
        }
        const double h = traj.rows.back().t;
        std::vector<double> xs, ys, mid, tail;
        for (const auto& row : traj.rows) {
            if (row.t >= h / 2.0) {
                xs.push_back(row.t);
                ys.push_back(row.norm);
            }
            if (row.t >= h / 3.0 && row.t < 2.0 * h / 3.0) mid.push_back(row.norm);
            if (row.t >= 2.0 * h / 3.0) tail.push_back(row.norm);
        }
        TrajectoryStability s;
        s.seed = traj.seed;
        s.time_avg_norm = traj.time_avg_norm;
        s.tail_slope = least_squares(xs, ys).slope;
        s.middle_average = mean_of(mid);
        s.tail_average = mean_of(tail);
        s.verdict = classify(s.tail_slope, s.middle_average, s.tail_average, opts);
        if (s.verdict == Verdict::Diverging) ++report.diverging;
        if (s.verdict == Verdict::BoundedEvidence) ++report.bounded;
        report.mean_slope += s.tail_slope;
        report.mean_time_avg_norm += s.time_avg_norm;
        sum_mid += s.middle_average;
        sum_tail += s.tail_average;
        report.runs.push_back(s);
    }
    const double n = static_cast<double>(trajectories.size());
    report.mean_slope /= n;
    report.mean_time_avg_norm /= n;
    report.verdict = classify(report.mean_slope, sum_mid / n, sum_tail / n, opts);
    return report;
}

DriftReport drift_estimate(const std::vector<Trajectory>& trajectories, double t_step, int num_bins,
                           int min_bin_count) {
    if (!(t_step > 0.0)) throw Error(ErrorCode::ConfigError, "drift step must be positive");
    if (num_bins < 1) throw Error(ErrorCode::ConfigError, "need at least one bin");
    DriftReport report;
    std::vector<double> ys, deltas;
    for (const auto& traj : trajectories) {
        if (!traj.has_extra()) {
            throw Error(ErrorCode::ConfigError, "trajectory carries no Lyapunov column; simulate with --lyapunov");
        }
        if (traj.rows.size() < 2) continue;
        const double interval = traj.rows[1].t - traj.rows[0].t;
        const double ratio = t_step / interval;
        const int stride = static_cast<int>(std::llround(ratio));
        if (stride < 1 || std::abs(ratio - stride) > 1e-9 * std::max(1.0, ratio)) {
            throw Error(ErrorCode::ConfigError, "drift step must be a multiple of the sample interval");
        }
        report.stride = stride;
        for (std::size_t k = 0; k + stride < traj.rows.size(); k += stride) {
            ys.push_back(traj.rows[k].norm);
            deltas.push_back(*traj.rows[k + stride].extra - *traj.rows[k].extra);
        }
    }
    report.increments = deltas.size();
    if (deltas.size() < 30) {
        throw Error(ErrorCode::InsufficientSamples,
                    "only " + std::to_string(deltas.size()) + " increments, need at least 30");
    }

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double y : ys) {
        if (y > 0.0) lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    if (!std::isfinite(lo)) lo = hi = 0.0;
    const bool single = !(hi > lo) || lo <= 0.0;
    const int nb = single ? 1 : num_bins;
    const double log_span = single ? 1.0 : std::log(hi / lo);
    std::vector<std::vector<double>> members(nb);
    for (std::size_t k = 0; k < ys.size(); ++k) {
        int b = 0;
        if (!single && ys[k] > 0.0) {
            b = static_cast<int>(std::floor(nb * std::log(ys[k] / lo) / log_span));
            b = std::clamp(b, 0, nb - 1);
        }
        members[b].push_back(deltas[k]);
    }
    for (int b = 0; b < nb; ++b) {
        const auto& xs = members[b];
        if (static_cast<int>(xs.size()) < min_bin_count) continue;
        DriftBin bin;
        bin.lo = single ? lo : lo * std::exp(log_span * b / nb);
        bin.hi = single ? hi : lo * std::exp(log_span * (b + 1) / nb);
        bin.n = static_cast<int>(xs.size());
        bin.mean_increment = mean_of(xs);
        if (xs.size() > 1) {
            double ss = 0.0;
            for (double x : xs) ss += (x - bin.mean_increment) * (x - bin.mean_increment);
            bin.stderr_increment = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
        }
        report.bins.push_back(bin);
    }
    const auto fit = least_squares(ys, deltas);
    report.a = fit.intercept;
    report.b = -fit.slope;
    if (report.bins.size() >= 2) {
        const auto& top = report.bins[report.bins.size() - 1];
        const auto& next = report.bins[report.bins.size() - 2];
        auto significant = [](const DriftBin& bin) {
            return bin.mean_increment < 0.0 && std::abs(bin.mean_increment) > 2.0 * bin.stderr_increment;
        };
        report.top_bins_negative = significant(top) && significant(next);
        report.drift_consistent = report.b > 0.0 && top.mean_increment < 0.0 && next.mean_increment < 0.0;
    }
    return report;
}

}  // namespace spn
