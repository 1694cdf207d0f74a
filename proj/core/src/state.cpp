#include "spn/state.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace spn {

SimState::SimState(const ValidatedNetwork& net, int predraw_depth)
    : net_(&net),
      predraw_depth_(predraw_depth),
      queues_(net.num_buffers()),
      queue_len_(net.num_buffers(), 0),
      slots_(net.num_activities()),
      processor_load_(net.num_processors(), 0),
      destined_(static_cast<std::size_t>(std::max(predraw_depth, 0) + 1) * net.num_buffers(), 0),
      timer_set_(net.num_components()) {}

void SimState::tally_path(const Job& job, int sign) {
    const int len = std::min<int>(predraw_depth_, static_cast<int>(job.path.size()));
    const auto I = queue_len_.size();
    for (int r = job.counter + 1; r <= len; ++r) destined_[r * I + job.path[r - 1]] += sign;
}

void SimState::enqueue(Job job) {
    const int i = job.buffer;
    const int c = job.counter;
    job.enqueue_seq = next_seq_++;
    tally_path(job, 1);
    queues_[i][c].push_back(std::move(job));
    ++queue_len_[i];
    ++total_waiting_;
}

Job SimState::take(int buffer, int counter) {
    auto& q = queues_[buffer];
    auto it = q.find(counter);
    if (it == q.end() || it->second.empty()) throw std::logic_error("take from empty queue");
    Job job = std::move(it->second.front());
    it->second.pop_front();
    if (it->second.empty()) q.erase(it);
    tally_path(job, -1);
    --queue_len_[buffer];
    --total_waiting_;
    return job;
}

int SimState::queue_length(int buffer, int counter) const {
    const auto& q = queues_[buffer];
    auto it = q.find(counter);
    return it == q.end() ? 0 : static_cast<int>(it->second.size());
}

void SimState::assign(int activity, Job job) {
    if (slots_[activity]) throw std::logic_error("activity already busy");
    if (!employable(activity)) throw std::logic_error("processor capacity exceeded");
    InService rec;
    rec.job = std::move(job);
    rec.start = clock_;
    rec.end = clock_;
    rec.pending = true;
    slots_[activity] = std::move(rec);
    for (int k : net_->activity(activity).processors) ++processor_load_[k];
}

void SimState::set_service(int activity, double service_time) {
    auto& rec = slots_[activity];
    rec->service_time = service_time;
    rec->end = rec->start + service_time / net_->activity(activity).beta;
    rec->pending = false;
}

InService SimState::release(int activity) {
    InService rec = std::move(*slots_[activity]);
    slots_[activity].reset();
    for (int k : net_->activity(activity).processors) --processor_load_[k];
    return rec;
}

double SimState::remaining(int activity) const {
    const auto& rec = slots_[activity];
    if (!rec) return 0.0;
    if (rec->pending) return 0.0;
    return std::max(0.0, (rec->end - clock_) * net_->activity(activity).beta);
}

bool SimState::employable(int activity) const {
    for (int k : net_->activity(activity).processors) {
        if (processor_load_[k] > 0) return false;
    }
    return true;
}

double SimState::timer(int component) const {
    const auto& set = timer_set_[component];
    if (!set) return 0.0;
    return std::max(0.0, 1.0 - (clock_ - *set));
}

double SimState::norm() const {
    double total = static_cast<double>(total_waiting_);
    for (std::size_t j = 0; j < slots_.size(); ++j) total += remaining(static_cast<int>(j));
    return total;
}

std::vector<double> SimState::waiting_per_buffer() const {
    std::vector<double> out(queue_len_.begin(), queue_len_.end());
    return out;
}

std::vector<double> SimState::in_service_per_buffer() const {
    std::vector<double> out(net_->num_buffers(), 0.0);
    for (std::size_t j = 0; j < slots_.size(); ++j) {
        if (slots_[j]) out[slots_[j]->job.buffer] += remaining(static_cast<int>(j));
    }
    return out;
}

}  // namespace spn
