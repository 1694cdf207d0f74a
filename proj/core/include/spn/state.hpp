#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "spn/network.hpp"

namespace spn {

struct Job {
    std::uint64_t id = 0;
    int counter = 1;  // 1 on external arrival, +1 at every routing
    int buffer = 0;
    // Pre-drawn route: path[m - 1] is the buffer visited with counter m.
    // Length <= predraw depth; shorter when the job leaves before then.
    std::vector<int> path;
    double arrival_time = 0.0;
    std::uint64_t enqueue_seq = 0;
};

struct InService {
    Job job;
    double start = 0.0;
    double end = 0.0;            // completion instant: start + service_time / beta
    double service_time = 0.0;   // drawn requirement
    bool pending = true;         // assigned by a policy, service time not yet drawn
};

// Dynamic network state: counted queues Q_{i,c}, in-service records V^j,
// component timers and the clock.
class SimState {
public:
    SimState(const ValidatedNetwork& net, int predraw_depth);

    const ValidatedNetwork& network() const { return *net_; }
    int predraw_depth() const { return predraw_depth_; }

    double clock() const { return clock_; }
    void advance_to(double t) { clock_ = t; }

    // Queues, keyed by counter within each buffer; deques are FIFO.
    void enqueue(Job job);
    Job take(int buffer, int counter);
    int queue_length(int buffer) const { return queue_len_[buffer]; }
    int queue_length(int buffer, int counter) const;
    bool has_waiting(int buffer) const { return queue_len_[buffer] > 0; }
    const std::map<int, std::deque<Job>>& queues(int buffer) const { return queues_[buffer]; }
    int total_waiting() const { return total_waiting_; }
    // Waiting jobs whose pre-drawn path has buffer l at position r, for
    // positions r beyond the job's counter. 0 < r <= predraw depth.
    int destined(int position, int buffer) const {
        return destined_[static_cast<std::size_t>(position) * queue_len_.size() + buffer];
    }

    // In-service records.
    bool busy(int activity) const { return slots_[activity].has_value(); }
    const std::optional<InService>& slot(int activity) const { return slots_[activity]; }
    // Moves the job into activity j's slot; service time is drawn later.
    void assign(int activity, Job job);
    void set_service(int activity, double service_time);
    InService release(int activity);
    // V^j at the current clock.
    double remaining(int activity) const;

    int processor_load(int processor) const { return processor_load_[processor]; }
    // True iff every processor of the activity is free.
    bool employable(int activity) const;

    // T^(h) at the current clock; zero when never set.
    double timer(int component) const;
    void set_timer(int component) { timer_set_[component] = clock_; }
    std::optional<double> timer_set_time(int component) const { return timer_set_[component]; }

    std::uint64_t next_job_id() { return next_id_++; }
    std::uint64_t next_seq() { return next_seq_++; }

    // |X| = sum of waiting jobs + sum of remaining requirements.
    double norm() const;
    std::vector<double> waiting_per_buffer() const;
    std::vector<double> in_service_per_buffer() const;

private:
    void tally_path(const Job& job, int sign);

    const ValidatedNetwork* net_;
    int predraw_depth_;
    double clock_ = 0.0;
    std::vector<std::map<int, std::deque<Job>>> queues_;
    std::vector<int> queue_len_;
    int total_waiting_ = 0;
    std::vector<std::optional<InService>> slots_;
    std::vector<int> processor_load_;
    std::vector<int> destined_;  // (depth + 1) x I
    std::vector<std::optional<double>> timer_set_;
    std::uint64_t next_id_ = 0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace spn
