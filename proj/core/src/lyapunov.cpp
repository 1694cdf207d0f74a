#include "spn/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "spn/error.hpp"

namespace spn {

namespace {

constexpr std::size_t kParallelThreshold = 4096;

// The witness is the first (schedule, buffer) in scan order whose
// coefficient is within kStrictTolerance of the maximum, so rounding noise
// between tied coordinates does not decide it.
struct ScanResult {
    double max_coefficient = -std::numeric_limits<double>::infinity();
    double max_quadratic = 0.0;
    double arg_coefficient = -std::numeric_limits<double>::infinity();
    std::size_t arg_schedule = 0;
    int arg_buffer = -1;

    void offer(double coefficient, std::size_t schedule, int buffer) {
        max_coefficient = std::max(max_coefficient, coefficient);
        if (arg_buffer < 0 || coefficient > arg_coefficient + kStrictTolerance) {
            arg_coefficient = coefficient;
            arg_schedule = schedule;
            arg_buffer = buffer;
        }
    }
};

ScanResult scan(const ValidatedNetwork& net, const Matrix& z, double epsilon,
                const std::vector<ScheduleVector>& schedules, std::size_t begin, std::size_t end) {
    ScanResult r;
    for (std::size_t n = begin; n < end; ++n) {
        const Vector delta = drift_vector(net, schedules[n], epsilon);
        const Vector zd = z * delta;
        r.max_quadratic = std::max(r.max_quadratic, delta.dot(zd));
        const auto blocked = blocking_buffers(net, schedules[n]);
        for (int i = 0; i < net.num_buffers(); ++i) {
            if (blocked[i]) continue;
            r.offer(zd[i], n, i);
        }
    }
    return r;
}

bool subset(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<int> sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// For every j in J_i some j' in J_l has K_j' inside K_j.
bool covered(const ValidatedNetwork& net, int i, int l) {
    for (int j : net.activities_of_buffer(i)) {
        const auto kj = sorted(net.activity(j).processors);
        bool found = false;
        for (int jp : net.activities_of_buffer(l)) {
            if (subset(sorted(net.activity(jp).processors), kj)) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

bool has_single_processor_activity(const ValidatedNetwork& net, int i) {
    const auto& acts = net.activities_of_buffer(i);
    return std::any_of(acts.begin(), acts.end(), [&](int j) { return net.activity(j).processors.size() == 1; });
}

int find_root(std::vector<int>& parent, int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
}

}  // namespace

void check_matrix(const Matrix& z, int num_buffers) {
    if (z.rows() != num_buffers || z.cols() != num_buffers) {
        throw Error(ErrorCode::InvalidSpec, "Z must be " + std::to_string(num_buffers) + "x" +
                                                std::to_string(num_buffers));
    }
    for (int i = 0; i < num_buffers; ++i) {
        for (int l = 0; l < num_buffers; ++l) {
            if (!std::isfinite(z(i, l))) throw Error(ErrorCode::InvalidSpec, "Z has a non-finite entry");
            if (z(i, l) < 0.0) throw Error(ErrorCode::NegativeEntryZ, "Z has a negative entry");
            if (z(i, l) != z(l, i)) throw Error(ErrorCode::NonSymmetricZ, "Z is not symmetric");
        }
    }
}

Vector drift_vector(const ValidatedNetwork& net, const ScheduleVector& u, double epsilon) {
    return net.load().rho + epsilon * net.mean_service() - service_rates(net, u);
}

double quadratic(const Matrix& z, const Vector& x) { return x.dot(z * x); }

CheckResult check_local(const ValidatedNetwork& net, const Matrix& z, double epsilon, std::uint64_t cap) {
    check_matrix(z, net.num_buffers());
    const auto schedules = enumerate_feasible(net, cap);

    ScanResult total;
    if (schedules.size() < kParallelThreshold) {
        total = scan(net, z, epsilon, schedules, 0, schedules.size());
    } else {
        const std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
        const std::size_t chunk = (schedules.size() + workers - 1) / workers;
        std::vector<ScanResult> parts(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t b = std::min(schedules.size(), w * chunk);
            const std::size_t e = std::min(schedules.size(), b + chunk);
            pool.emplace_back([&, w, b, e] { parts[w] = scan(net, z, epsilon, schedules, b, e); });
        }
        for (auto& t : pool) t.join();
        // merged in chunk order so the witness matches the sequential scan
        for (const auto& p : parts) {
            total.max_quadratic = std::max(total.max_quadratic, p.max_quadratic);
            if (p.arg_buffer < 0) continue;
            total.offer(p.arg_coefficient, p.arg_schedule, p.arg_buffer);
            total.max_coefficient = std::max(total.max_coefficient, p.max_coefficient);
        }
    }

    CheckResult out;
    out.schedules_checked = schedules.size();
    out.c = total.max_quadratic + 1.0;
    if (total.arg_buffer < 0) {
        // no supported coordinate at all (every buffer always blocked)
        out.holds = true;
        out.max_coefficient = 0.0;
        out.eta = 0.0;
        return out;
    }
    out.max_coefficient = total.max_coefficient;
    out.holds = total.max_coefficient < -kStrictTolerance;
    if (out.holds) {
        out.eta = -2.0 * total.max_coefficient;
    } else {
        SupportPattern s = SupportPattern::all(net.num_buffers(), false);
        s.s[total.arg_buffer] = 1;
        out.witness = Witness{s, schedules[total.arg_schedule], total.arg_buffer, total.arg_coefficient};
    }
    return out;
}

std::optional<double> max_slack(const ValidatedNetwork& net, const Matrix& z, std::uint64_t cap) {
    check_matrix(z, net.num_buffers());
    const Vector zm = z * net.mean_service();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& u : enumerate_feasible(net, cap)) {
        const Vector a = z * (net.load().rho - service_rates(net, u));
        const auto blocked = blocking_buffers(net, u);
        for (int i = 0; i < net.num_buffers(); ++i) {
            if (blocked[i]) continue;
            if (a[i] >= -kStrictTolerance) return std::nullopt;
            if (zm[i] > 0.0) best = std::min(best, -a[i] / zm[i]);
        }
    }
    return best;
}

bool drift_inequality_holds(const Matrix& z, const Vector& w, const Vector& delta, double eta, double c) {
    const double lhs = quadratic(z, w + delta);
    const double rhs = quadratic(z, w) - eta * w.lpNorm<1>() + c;
    return lhs <= rhs;
}

std::uint64_t sample_check(const ValidatedNetwork& net, const QuadraticCertificate& cert, std::uint64_t samples,
                           Rng& rng, std::uint64_t cap) {
    check_matrix(cert.z, net.num_buffers());
    const int I = net.num_buffers();
    if (I >= 64) throw Error(ErrorCode::EnumerationTooLarge, "sample_check supports at most 63 buffers");
    std::unordered_map<std::uint64_t, std::vector<ScheduleVector>> cache;
    std::uint64_t violations = 0;
    for (std::uint64_t n = 0; n < samples; ++n) {
        std::uint64_t mask = 0;
        Vector w = Vector::Zero(I);
        for (int i = 0; i < I; ++i) {
            if (rng.bernoulli(0.5)) {
                mask |= std::uint64_t{1} << i;
                w[i] = std::pow(10.0, rng.uniform(-3.0, 4.0));
            }
        }
        auto it = cache.find(mask);
        if (it == cache.end()) {
            it = cache.emplace(mask, enumerate_maximal(net, SupportPattern::from_mask(mask, I), cap)).first;
        }
        const auto& candidates = it->second;
        if (candidates.empty()) {
            ++violations;
            continue;
        }
        const auto& u = candidates[rng.below(candidates.size())];
        if (!drift_inequality_holds(cert.z, w, drift_vector(net, u, cert.epsilon), cert.eta, cert.c)) ++violations;
    }
    return violations;
}

Vector violation_scaling(const ValidatedNetwork& net, const Matrix& z, double epsilon, const Witness& witness,
                         double eta, double c) {
    const Vector delta = drift_vector(net, witness.schedule, epsilon);
    const double a = (z * delta)[witness.buffer];
    const double q = quadratic(z, delta);
    const double slope = 2.0 * a + eta;
    if (!(slope > 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "witness coordinate does not grow the drift; nothing to scale");
    }
    double x = std::max(1.0, 2.0 * (c - q) / slope + 1.0);
    Vector w = Vector::Zero(net.num_buffers());
    for (int attempt = 0; attempt < 64; ++attempt) {
        w[witness.buffer] = x;
        if (!drift_inequality_holds(z, w, delta, eta, c)) return w;
        x *= 2.0;
    }
    throw Error(ErrorCode::InvalidSpec, "could not scale the witness into a violation");
}

Condition parse_condition(std::string_view name) {
    if (name == "C1") return Condition::C1;
    if (name == "C2") return Condition::C2;
    if (name == "C2p" || name == "C2'") return Condition::C2p;
    if (name == "C3") return Condition::C3;
    if (name == "C3p" || name == "C3'") return Condition::C3p;
    throw Error(ErrorCode::ConfigError, "unknown condition '" + std::string(name) + "' (C1|C2|C2p|C3|C3p)");
}

std::string_view to_string(Condition condition) {
    switch (condition) {
        case Condition::C1: return "C1";
        case Condition::C2: return "C2";
        case Condition::C2p: return "C2p";
        case Condition::C3: return "C3";
        case Condition::C3p: return "C3p";
    }
    return "?";
}

bool check_structural(const ValidatedNetwork& net, const Matrix& z, Condition condition) {
    check_matrix(z, net.num_buffers());
    const int I = net.num_buffers();
    auto coupled_ok = [&](auto&& pred) {
        for (int i = 0; i < I; ++i) {
            for (int l = 0; l < I; ++l) {
                if (z(i, l) != 0.0 && !pred(i, l)) return false;
            }
        }
        return true;
    };
    auto single_processor_everywhere = [&] {
        for (int i = 0; i < I; ++i) {
            if (!has_single_processor_activity(net, i)) return false;
        }
        return true;
    };
    switch (condition) {
        case Condition::C1:
            return net.spec().synchronized &&
                   coupled_ok([&](int i, int l) { return net.component_of_buffer(i) == net.component_of_buffer(l); });
        case Condition::C2:
            return coupled_ok([&](int i, int l) { return activity_interchangeable(net, i, l); }) &&
                   single_processor_everywhere();
        case Condition::C2p:
            return coupled_ok([&](int i, int l) { return activity_interchangeable(net, i, l); });
        case Condition::C3:
            return coupled_ok([&](int i, int l) { return covered(net, i, l) && covered(net, l, i); }) &&
                   single_processor_everywhere();
        case Condition::C3p:
            return coupled_ok([&](int i, int l) { return covered(net, i, l) && covered(net, l, i); });
    }
    return false;
}

ConstructedCertificate construct_psn(const ValidatedNetwork& net) {
    const int I = net.num_buffers();
    const int K = net.num_processors();
    for (int j = 0; j < net.num_activities(); ++j) {
        if (net.activity(j).processors.size() != 1) {
            throw Error(ErrorCode::AssumptionA1Violated,
                        "activity " + std::to_string(j + 1) + " uses more than one processor");
        }
    }
    // Buffer-processor graph; nodes 0..I-1 are buffers, I..I+K-1 processors.
    std::vector<int> parent(I + K);
    std::iota(parent.begin(), parent.end(), 0);
    for (int j = 0; j < net.num_activities(); ++j) {
        const int a = find_root(parent, net.activity(j).buffer);
        const int b = find_root(parent, I + net.activity(j).processors.front());
        if (a != b) parent[a] = b;
    }
    std::vector<int> comp(I, -1);
    std::vector<int> root_to_comp(I + K, -1);
    int H = 0;
    for (int i = 0; i < I; ++i) {
        const int r = find_root(parent, i);
        if (root_to_comp[r] < 0) root_to_comp[r] = H++;
        comp[i] = root_to_comp[r];
    }
    std::vector<std::vector<int>> buffers(H), processors(H);
    for (int i = 0; i < I; ++i) buffers[comp[i]].push_back(i);
    for (int k = 0; k < K; ++k) {
        const int r = find_root(parent, I + k);
        if (root_to_comp[r] >= 0) processors[root_to_comp[r]].push_back(k);
    }

    ConstructedCertificate out;
    out.z = Matrix::Zero(I, I);
    double bound = std::numeric_limits<double>::infinity();
    bool load_ok = true;
    for (int h = 0; h < H; ++h) {
        double beta_h = 0.0;
        for (int k : processors[h]) {
            double min_beta = std::numeric_limits<double>::infinity();
            for (int i : buffers[h]) {
                bool linked = false;
                for (int j : net.activities_of_buffer(i)) {
                    if (net.activity(j).processors.front() == k) {
                        linked = true;
                        min_beta = std::min(min_beta, net.activity(j).beta);
                    }
                }
                if (!linked) {
                    throw Error(ErrorCode::AssumptionA2Violated,
                                "buffer " + std::to_string(i + 1) + " is not linked to processor " +
                                    std::to_string(k + 1) + " of its component");
                }
            }
            beta_h += min_beta;
        }
        double rho_h = 0.0, m_h = 0.0;
        for (int i : buffers[h]) {
            rho_h += net.load().rho[i];
            m_h += net.mean_service()[i];
            for (int l : buffers[h]) out.z(i, l) = 1.0;
        }
        if (rho_h >= beta_h) load_ok = false;
        else bound = std::min(bound, (beta_h - rho_h) / m_h);
    }
    if (load_ok) out.epsilon_bound = bound;
    return out;
}

ConstructedCertificate construct_comm(const ValidatedNetwork& net) {
    if (!net.spec().synchronized) throw Error(ErrorCode::NotSynchronized, "network is not synchronized");
    const int I = net.num_buffers();
    std::vector<std::vector<int>> procs(I);
    std::size_t max_k = 0;
    for (int i = 0; i < I; ++i) {
        if (net.activities_of_buffer(i).size() != 1) {
            throw Error(ErrorCode::AssumptionB1Violated,
                        "buffer " + std::to_string(i + 1) + " does not have exactly one activity");
        }
        procs[i] = sorted(net.activity(net.activities_of_buffer(i).front()).processors);
        max_k = std::max(max_k, procs[i].size());
    }
    ConstructedCertificate out;
    out.z = Matrix::Zero(I, I);
    for (int i = 0; i < I; ++i) {
        for (int l = 0; l < I; ++l) {
            std::vector<int> common;
            std::set_intersection(procs[i].begin(), procs[i].end(), procs[l].begin(), procs[l].end(),
                                  std::back_inserter(common));
            out.z(i, l) = static_cast<double>(common.size());
        }
    }
    const double capacity = 1.0 / static_cast<double>(max_k);
    double bound = std::numeric_limits<double>::infinity();
    for (int k = 0; k < net.num_processors(); ++k) {
        double rho_k = 0.0, m_k = 0.0;
        bool used = false;
        for (int i = 0; i < I; ++i) {
            if (std::binary_search(procs[i].begin(), procs[i].end(), k)) {
                used = true;
                rho_k += net.load().rho[i];
                m_k += net.mean_service()[i];
            }
        }
        if (!used) continue;
        if (rho_k >= capacity) return out;
        bound = std::min(bound, (capacity - rho_k) / m_k);
    }
    out.epsilon_bound = bound;
    return out;
}

}  // namespace spn
