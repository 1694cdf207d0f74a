#include "spn/policy.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "spn/error.hpp"

namespace spn {

namespace {

int pick(const std::vector<int>& candidates, const PolicyRandomness& rnd) {
    if (rnd.tie_break == TieBreak::Random && rnd.tie_rng != nullptr && candidates.size() > 1) {
        return candidates[rnd.tie_rng->below(candidates.size())];
    }
    return candidates.front();
}

void start(SimState& state, int activity, int buffer, int counter) {
    state.assign(activity, state.take(buffer, counter));
}

}  // namespace

std::string policy_name(const PolicyKind& policy) {
    struct Visitor {
        std::string operator()(const Lrfs&) const { return "lrfs"; }
        std::string operator()(const EpsLrfs&) const { return "eps-lrfs"; }
        std::string operator()(const StaticPriority&) const { return "static-priority"; }
    };
    return std::visit(Visitor{}, policy);
}

std::vector<int> nonmaximal_activities(const SimState& state, int component) {
    const auto& net = state.network();
    std::vector<int> out;
    for (int j : net.component_activities(component)) {
        if (state.has_waiting(net.activity(j).buffer) && state.employable(j)) out.push_back(j);
    }
    return out;
}

std::vector<int> lrfs_decide(SimState& state, int component, const PolicyRandomness& rnd) {
    const auto& net = state.network();
    std::vector<int> started;
    while (true) {
        const auto sigma = nonmaximal_activities(state, component);
        if (sigma.empty()) break;
        // Step 2: smallest counter among buffers {i_j : j in Sigma}.
        int best_counter = std::numeric_limits<int>::max();
        std::vector<int> tied;
        for (int j : sigma) {
            const int i = net.activity(j).buffer;
            const int c = state.queues(i).begin()->first;
            if (c < best_counter) {
                best_counter = c;
                tied.assign(1, i);
            } else if (c == best_counter && std::find(tied.begin(), tied.end(), i) == tied.end()) {
                tied.push_back(i);
            }
        }
        std::sort(tied.begin(), tied.end());
        const int buffer = pick(tied, rnd);
        // Step 3: an activity of Sigma able to serve that buffer.
        std::vector<int> able;
        for (int j : sigma) {
            if (net.activity(j).buffer == buffer) able.push_back(j);
        }
        const int activity = pick(able, rnd);
        start(state, activity, buffer, best_counter);
        started.push_back(activity);
    }
    return started;
}

std::vector<int> eps_lrfs_decide(SimState& state, int component, double epsilon, const PolicyRandomness& rnd) {
    const auto& net = state.network();
    std::vector<int> started;
    // Step 1: buffer holding a largest-counter waiting job.
    int top_buffer = -1;
    int top_counter = 0;
    for (int i : net.component_buffers(component)) {
        if (!state.has_waiting(i)) continue;
        const int c = state.queues(i).rbegin()->first;
        if (top_buffer < 0 || c > top_counter) {
            top_buffer = i;
            top_counter = c;
        }
    }
    if (top_buffer >= 0) {
        // Step 2: non-maximal activities among J_i.
        std::vector<int> sigma;
        for (int j : net.activities_of_buffer(top_buffer)) {
            if (state.employable(j)) sigma.push_back(j);
        }
        // Step 3
        if (!sigma.empty() && state.timer(component) <= kTimerZero) {
            bool heads = false;
            if (epsilon >= 1.0) {
                heads = true;
            } else if (epsilon > 0.0) {
                heads = rnd.coin_rng->bernoulli(epsilon);
            }
            if (heads) {
                const int activity = pick(sigma, rnd);
                start(state, activity, top_buffer, top_counter);
                started.push_back(activity);
            }
            state.set_timer(component);
        }
    }
    // Step 4
    auto rest = lrfs_decide(state, component, rnd);
    started.insert(started.end(), rest.begin(), rest.end());
    return started;
}

std::vector<int> static_priority_decide(SimState& state, int component, const std::vector<int>& order) {
    const auto& net = state.network();
    const auto rank = priority_ranks(order, net.num_buffers());
    std::vector<int> started;
    while (true) {
        const auto sigma = nonmaximal_activities(state, component);
        if (sigma.empty()) break;
        int activity = sigma.front();
        for (int j : sigma) {
            if (rank[net.activity(j).buffer] < rank[net.activity(activity).buffer]) activity = j;
        }
        const int buffer = net.activity(activity).buffer;
        // FIFO within the buffer across counters.
        int counter = 0;
        std::uint64_t oldest = std::numeric_limits<std::uint64_t>::max();
        for (const auto& [c, q] : state.queues(buffer)) {
            if (q.front().enqueue_seq < oldest) {
                oldest = q.front().enqueue_seq;
                counter = c;
            }
        }
        start(state, activity, buffer, counter);
        started.push_back(activity);
    }
    return started;
}

std::vector<int> decide(const PolicyKind& policy, SimState& state, int component, const PolicyRandomness& rnd) {
    if (std::holds_alternative<Lrfs>(policy)) return lrfs_decide(state, component, rnd);
    if (const auto* e = std::get_if<EpsLrfs>(&policy)) return eps_lrfs_decide(state, component, e->epsilon, rnd);
    return static_priority_decide(state, component, std::get<StaticPriority>(policy).order);
}

std::vector<int> priority_ranks(const std::vector<int>& order, int num_buffers) {
    std::vector<int> rank(num_buffers, -1);
    if (static_cast<int>(order.size()) != num_buffers) {
        throw Error(ErrorCode::ConfigError, "priority order must list every buffer exactly once");
    }
    for (int r = 0; r < num_buffers; ++r) {
        const int i = order[r];
        if (i < 0 || i >= num_buffers || rank[i] >= 0) {
            throw Error(ErrorCode::ConfigError, "priority order must be a permutation of the buffers");
        }
        rank[i] = r;
    }
    return rank;
}

}  // namespace spn
