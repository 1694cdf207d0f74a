#include "spn/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "spn/error.hpp"

namespace spn {

namespace {

constexpr double kRoutingTol = 1e-12;

std::string buffer_label(int i) { return "buffer " + std::to_string(i + 1); }

std::set<int> processors_of_buffer(const NetworkSpec& spec, int i) {
    std::set<int> out;
    for (const auto& a : spec.activities) {
        if (a.buffer == i) out.insert(a.processors.begin(), a.processors.end());
    }
    return out;
}

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

EffectiveLoad effective_rates(const Vector& alpha, const Matrix& routing, const Vector& mean_service) {
    const auto n = alpha.size();
    const Matrix a = Matrix::Identity(n, n) - routing.transpose();
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::NonConvergentRouting, "I - P^T is singular");
    }
    EffectiveLoad out;
    out.lambda = lu.solve(alpha);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(out.lambda[i] >= -1e-12) || !std::isfinite(out.lambda[i])) {
            throw Error(ErrorCode::NonConvergentRouting, "routing series does not converge");
        }
        out.lambda[i] = std::max(0.0, out.lambda[i]);
    }
    out.rho = out.lambda.cwiseProduct(mean_service);
    return out;
}

std::optional<int> routes_bounded(const Matrix& routing) {
    const int n = static_cast<int>(routing.rows());
    // longest[i]: number of buffers on the longest support path starting at i
    std::vector<int> longest(n, 0);
    std::vector<int> mark(n, 0);  // 0 new, 1 on stack, 2 done
    bool cyclic = false;
    std::function<int(int)> visit = [&](int i) -> int {
        if (mark[i] == 2) return longest[i];
        if (mark[i] == 1) {
            cyclic = true;
            return 0;
        }
        mark[i] = 1;
        int best = 0;
        for (int l = 0; l < n && !cyclic; ++l) {
            if (routing(i, l) > 0.0) best = std::max(best, visit(l));
        }
        mark[i] = 2;
        longest[i] = best + 1;
        return longest[i];
    };
    int depth = 0;
    for (int i = 0; i < n && !cyclic; ++i) depth = std::max(depth, visit(i));
    if (cyclic) return std::nullopt;
    return std::max(depth, 1);
}

double spectral_radius_bound(const Matrix& routing) {
    if (routing.size() == 0) return 0.0;
    Matrix a = routing.cwiseAbs();
    double log_scale = 0.0;  // log of the factor divided out of a
    double best = std::numeric_limits<double>::infinity();
    double power = 1.0;
    for (int s = 0; s <= 40; ++s) {
        const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
        if (norm == 0.0) return 0.0;
        best = std::min(best, std::exp((log_scale + std::log(norm)) / power));
        a /= norm;
        log_scale += std::log(norm);
        a = a * a;
        log_scale *= 2.0;
        power *= 2.0;
    }
    return best;
}

double ValidatedNetwork::beta_min() const {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& a : spec_.activities) b = std::min(b, a.beta);
    return b;
}

std::vector<std::vector<int>> finest_partition(const NetworkSpec& spec) {
    const int n = spec.num_buffers();
    DisjointSets sets(n);
    std::vector<int> owner(spec.num_processors, -1);
    for (const auto& a : spec.activities) {
        for (int k : a.processors) {
            if (k < 0 || k >= spec.num_processors) continue;
            if (owner[k] < 0) {
                owner[k] = a.buffer;
            } else {
                sets.unite(owner[k], a.buffer);
            }
        }
    }
    std::vector<std::vector<int>> out;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        const int root = sets.find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[slot[root]].push_back(i);
    }
    return out;
}

ValidatedNetwork validate(const NetworkSpec& spec) {
    std::vector<Violation> bad;
    auto fail = [&](ErrorCode code, std::string msg) { bad.push_back({code, std::move(msg)}); };

    const int n = spec.num_buffers();
    if (n < 1) fail(ErrorCode::InvalidSpec, "at least one buffer is required");
    if (spec.num_processors < 1) fail(ErrorCode::InvalidSpec, "at least one processor is required");
    if (static_cast<int>(spec.services.size()) != n) fail(ErrorCode::InvalidSpec, "services[] must match buffers[]");
    if (!spec.buffer_names.empty() && static_cast<int>(spec.buffer_names.size()) != n) {
        fail(ErrorCode::InvalidSpec, "buffer names must match buffers[]");
    }
    if (spec.routing.rows() != n || spec.routing.cols() != n) {
        fail(ErrorCode::InvalidSpec, "routing must be an I x I matrix");
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));

    for (int j = 0; j < spec.num_activities(); ++j) {
        const auto& a = spec.activities[j];
        const std::string label = "activity " + std::to_string(j + 1);
        if (a.buffer < 0 || a.buffer >= n) fail(ErrorCode::InvalidSpec, label + " serves an unknown buffer");
        if (a.processors.empty()) fail(ErrorCode::InvalidSpec, label + " has an empty processor set");
        std::set<int> seen;
        for (int k : a.processors) {
            if (k < 0 || k >= spec.num_processors) fail(ErrorCode::InvalidSpec, label + " uses an unknown processor");
            if (!seen.insert(k).second) fail(ErrorCode::InvalidSpec, label + " lists a processor twice");
        }
        if (!(a.beta > 0.0) || !std::isfinite(a.beta)) fail(ErrorCode::InvalidSpec, label + " needs beta > 0");
    }
    for (int i = 0; i < n; ++i) {
        if (auto why = spec.services[i].check(); !why.empty()) {
            fail(ErrorCode::InvalidSpec, buffer_label(i) + " service: " + why);
        }
        const auto& arr = spec.arrivals[i];
        if (arr.kind != ArrivalKind::None && (!(arr.rate >= 0.0) || !std::isfinite(arr.rate))) {
            fail(ErrorCode::InvalidSpec, buffer_label(i) + " arrival rate must be finite and >= 0");
        }
        double row = 0.0;
        for (int l = 0; l < n; ++l) {
            const double p = spec.routing(i, l);
            if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidSpec, "routing entries must lie in [0, 1]");
            row += p;
        }
        if (row > 1.0 + kRoutingTol) fail(ErrorCode::InvalidSpec, "routing row " + std::to_string(i + 1) + " sums above 1");
    }
    bool any_arrivals = false;
    for (const auto& a : spec.arrivals) any_arrivals = any_arrivals || a.nominal_rate() > 0.0;
    if (!any_arrivals) fail(ErrorCode::InvalidSpec, "at least one buffer needs a positive arrival rate");
    if (!bad.empty()) throw ValidationError(std::move(bad));

    ValidatedNetwork net;
    net.spec_ = spec;
    net.alpha_ = Vector(n);
    net.mean_ = Vector(n);
    for (int i = 0; i < n; ++i) {
        net.alpha_[i] = spec.arrivals[i].nominal_rate();
        net.mean_[i] = spec.services[i].mean();
    }
    if (net.spec_.buffer_names.empty()) {
        for (int i = 0; i < n; ++i) net.spec_.buffer_names.push_back(std::to_string(i + 1));
    }

    // Nonnegative P: spectral radius < 1 iff I - P is a nonsingular M-matrix,
    // i.e. (I - P)^{-1} exists and is entrywise nonnegative.
    const Matrix eye = Matrix::Identity(n, n);
    Eigen::FullPivLU<Matrix> lu(eye - spec.routing);
    bool convergent = lu.isInvertible();
    if (convergent) {
        net.fundamental_ = lu.inverse();
        convergent = net.fundamental_.allFinite() && net.fundamental_.minCoeff() >= -1e-9;
    }
    net.spectral_radius_ = spectral_radius_bound(spec.routing);
    if (!convergent || net.spectral_radius_ >= 1.0 + 1e-12) {
        fail(ErrorCode::NonConvergentRouting, "spectral radius of P is not below 1");
        throw ValidationError(std::move(bad));
    }
    net.spectral_radius_ = std::min(net.spectral_radius_, 1.0 - 1e-12);
    net.load_ = effective_rates(net.alpha_, spec.routing, net.mean_);
    net.expected_work_ = net.fundamental_ * net.mean_;
    net.continuation_work_ = spec.routing * net.expected_work_;
    net.route_depth_ = routes_bounded(spec.routing);

    net.by_buffer_.assign(n, {});
    net.by_processor_.assign(spec.num_processors, {});
    for (int j = 0; j < spec.num_activities(); ++j) {
        const auto& a = spec.activities[j];
        net.by_buffer_[a.buffer].push_back(j);
        for (int k : a.processors) net.by_processor_[k].push_back(j);
    }
    for (int i = 0; i < n; ++i) {
        if (net.by_buffer_[i].empty() && net.load_.lambda[i] > 0.0) {
            fail(ErrorCode::InvalidSpec, buffer_label(i) + " receives jobs but has no activity");
        }
    }

    // Partition
    if (spec.partition.empty()) {
        net.components_ = finest_partition(spec);
    } else {
        std::vector<int> count(n, 0);
        for (const auto& comp : spec.partition) {
            if (comp.empty()) fail(ErrorCode::InvalidSpec, "partition has an empty component");
            for (int i : comp) {
                if (i < 0 || i >= n) {
                    fail(ErrorCode::InvalidSpec, "partition names an unknown buffer");
                } else {
                    ++count[i];
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            if (count[i] != 1) fail(ErrorCode::InvalidSpec, buffer_label(i) + " must appear in exactly one component");
        }
        if (!bad.empty()) throw ValidationError(std::move(bad));
        net.components_ = spec.partition;
        for (auto& comp : net.components_) std::sort(comp.begin(), comp.end());
    }
    net.buffer_component_.assign(n, -1);
    for (int h = 0; h < net.num_components(); ++h) {
        for (int i : net.components_[h]) net.buffer_component_[i] = h;
    }
    std::vector<std::set<int>> used(n);
    for (int i = 0; i < n; ++i) used[i] = processors_of_buffer(spec, i);
    std::vector<int> processor_owner(spec.num_processors, -1);
    for (int i = 0; i < n; ++i) {
        for (int k : used[i]) {
            const int h = net.buffer_component_[i];
            if (processor_owner[k] < 0) {
                processor_owner[k] = h;
            } else if (processor_owner[k] != h) {
                fail(ErrorCode::PartitionNotProcessorIndependent,
                     "processor " + std::to_string(k + 1) + " is shared by components " +
                         std::to_string(processor_owner[k] + 1) + " and " + std::to_string(h + 1));
                processor_owner[k] = h;
            }
        }
    }
    net.component_activities_.assign(net.num_components(), {});
    net.component_processors_.assign(net.num_components(), {});
    for (int j = 0; j < spec.num_activities(); ++j) {
        net.component_activities_[net.component_of_activity(j)].push_back(j);
    }
    for (int h = 0; h < net.num_components(); ++h) {
        std::set<int> ks;
        for (int i : net.components_[h]) ks.insert(used[i].begin(), used[i].end());
        net.component_processors_[h].assign(ks.begin(), ks.end());
    }

    if (spec.synchronized) {
        for (int i = 0; i < n; ++i) {
            const auto& s = spec.services[i];
            if (s.kind != ServiceKind::Deterministic || s.mean_value != 1.0) {
                fail(ErrorCode::SynchronizedShapeViolation, buffer_label(i) + " service must be deterministic 1");
            }
            if (spec.arrivals[i].kind == ArrivalKind::Poisson) {
                fail(ErrorCode::SynchronizedShapeViolation, buffer_label(i) + " arrivals must be slotted");
            }
        }
        for (int j = 0; j < spec.num_activities(); ++j) {
            if (spec.activities[j].beta != 1.0) {
                fail(ErrorCode::SynchronizedShapeViolation, "activity " + std::to_string(j + 1) + " needs beta = 1");
            }
        }
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
    return net;
}

bool activity_interchangeable(const ValidatedNetwork& net, int i, int l) {
    auto family = [&](int b) {
        std::set<std::vector<int>> out;
        for (int j : net.activities_of_buffer(b)) {
            auto ks = net.activity(j).processors;
            std::sort(ks.begin(), ks.end());
            out.insert(std::move(ks));
        }
        return out;
    };
    return family(i) == family(l);
}

bool processor_independent(const ValidatedNetwork& net, int i, int l) {
    const auto a = processors_of_buffer(net.spec(), i);
    const auto b = processors_of_buffer(net.spec(), l);
    for (int k : a) {
        if (b.count(k)) return false;
    }
    return true;
}

NetworkSpec expand_capacities(const NetworkSpec& spec, const std::vector<int>& capacities) {
    if (static_cast<int>(capacities.size()) != spec.num_processors) {
        throw Error(ErrorCode::InvalidSpec, "one capacity per processor is required");
    }
    std::vector<int> first_copy(spec.num_processors, 0);
    int total = 0;
    for (int k = 0; k < spec.num_processors; ++k) {
        if (capacities[k] < 1) throw Error(ErrorCode::InvalidSpec, "capacities must be >= 1");
        first_copy[k] = total;
        total += capacities[k];
    }
    NetworkSpec out = spec;
    out.num_processors = total;
    out.activities.clear();
    for (const auto& a : spec.activities) {
        std::vector<int> pick(a.processors.size(), 0);
        while (true) {
            Activity copy = a;
            for (std::size_t q = 0; q < a.processors.size(); ++q) {
                copy.processors[q] = first_copy[a.processors[q]] + pick[q];
            }
            out.activities.push_back(std::move(copy));
            std::size_t q = 0;
            while (q < pick.size() && ++pick[q] == capacities[a.processors[q]]) pick[q++] = 0;
            if (q == pick.size()) break;
        }
    }
    return out;
}

}  // namespace spn
