#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "spn/policy.hpp"
#include "spn/random.hpp"
#include "spn/state.hpp"

namespace spn {

struct InitialJobs {
    int buffer = 0;
    int counter = 1;
    int count = 0;
};

struct SimOptions {
    double horizon = 1000.0;
    double sample_interval = 1.0;
    std::uint64_t seed = 1;
    int predraw_depth = 0;  // 0: plain X process; D > 0: routes pre-drawn to length D
    int counter_cap = 0;    // > 0 records Q_{i,c} for c <= cap in every row
    int replications = 1;
    bool audit = false;
    TieBreak tie_break = TieBreak::LowestIndex;
    std::vector<InitialJobs> initial;
    // Optional extra sampled column, e.g. the global Lyapunov value.
    std::function<double(const SimState&)> sample_hook;
    std::string sample_hook_name = "Lglo";
};

struct SampleRow {
    double t = 0.0;
    double norm = 0.0;
    std::vector<double> queue;        // Q_i
    std::vector<double> in_service;   // V_i
    std::vector<int> counter_detail;  // Q_{i,c}, row-major over (i, c <= cap)
    std::optional<double> extra;
};

// Invariant ledger accumulated in audit mode.
struct AuditReport {
    std::uint64_t batches = 0;
    std::uint64_t feasibility = 0;
    std::uint64_t maximality = 0;
    std::uint64_t non_preemption = 0;
    std::uint64_t counter_monotonicity = 0;
    std::uint64_t workload_identity = 0;
    std::uint64_t conservation = 0;
    std::uint64_t synchronization = 0;

    // Increments of M1 + M2 at random routing instants (counter >= D).
    std::uint64_t routing_events = 0;
    double routing_sum = 0.0;
    double routing_sum_sq = 0.0;

    std::uint64_t total_violations() const;
    double routing_mean() const;
    double routing_stderr() const;
    // |mean| <= 3 standard errors
    bool routing_martingale_ok() const;
    void merge(const AuditReport& other);
};

struct Trajectory {
    std::uint64_t seed = 0;
    int num_buffers = 0;
    int counter_cap = 0;
    std::string extra_name;
    std::vector<SampleRow> rows;
    double horizon = 0.0;
    double time_avg_norm = 0.0;  // exact integral of |X| over [0, horizon] / horizon
    std::uint64_t events_processed = 0;
    double final_norm = 0.0;
    std::optional<AuditReport> audit;

    bool has_extra() const { return !rows.empty() && rows.front().extra.has_value(); }
};

// Event-driven simulation of one replication. The policy runs once per
// affected component after all completions and arrivals at an instant.
class Simulator {
public:
    Simulator(const ValidatedNetwork& net, PolicyKind policy, SimOptions opts);

    const SimState& state() const { return state_; }
    const ValidatedNetwork& network() const { return *net_; }
    double next_event_time() const;
    std::uint64_t events_processed() const { return events_; }

    // Processes the next instant with events (and samples due before it).
    // Returns false once the next instant lies beyond the horizon.
    bool step();
    void run();
    Trajectory finish();

    // Called after every processed instant.
    std::function<void(const Simulator&)> on_instant;

private:
    enum class EventKind : int { Completion = 0, Arrival = 1, SlotEpoch = 2 };
    struct Event {
        double time;
        EventKind kind;
        int index;
        std::uint64_t seq;
        bool operator>(const Event& o) const {
            if (time != o.time) return time > o.time;
            if (kind != o.kind) return kind > o.kind;
            return seq > o.seq;
        }
    };

    void push(double time, EventKind kind, int index);
    void advance(double t);
    void emit_samples_before(double t, bool inclusive);
    void process_instant(double t, bool all_components);
    void complete(int activity, std::vector<int>& touched, double& delta_norm);
    void arrive(int buffer, std::vector<int>& touched, double& delta_norm);
    std::vector<int> draw_route(int first_buffer, int first_counter);
    int sample_next(int buffer);
    void audit_instant(double t, double expected_norm, const std::vector<int>& decided);

    const ValidatedNetwork* net_;
    PolicyKind policy_;
    SimOptions opts_;
    SimState state_;
    Rng arrivals_rng_, service_rng_, routing_rng_, coin_rng_, tie_rng_;
    PolicyRandomness rnd_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_q_;
    std::uint64_t seq_ = 0;
    std::uint64_t events_ = 0;
    std::uint64_t next_sample_ = 0;
    double area_ = 0.0;
    Trajectory traj_;
    AuditReport audit_;
    // in-service snapshot for non-preemption checks: job id and end time
    std::vector<std::optional<std::pair<std::uint64_t, double>>> shadow_;
    bool done_ = false;
};

Trajectory simulate(const ValidatedNetwork& net, const PolicyKind& policy, const SimOptions& opts);

// Replication r uses seed opts.seed + r; replications run on worker threads.
std::vector<Trajectory> run_replications(const ValidatedNetwork& net, const PolicyKind& policy,
                                         const SimOptions& opts, unsigned threads = 0);

}  // namespace spn
