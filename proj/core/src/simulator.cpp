#include "spn/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "spn/error.hpp"
#include "spn/weights.hpp"

namespace spn {

namespace {

constexpr double kAuditSlack = 1e-9;

bool is_integral(double x) { return std::floor(x) == x; }

void check_options(const ValidatedNetwork& net, const SimOptions& opts) {
    if (!(opts.horizon > 0.0) || !std::isfinite(opts.horizon)) {
        throw Error(ErrorCode::HorizonNonPositive, "horizon must be positive and finite");
    }
    if (!(opts.sample_interval > 0.0)) throw Error(ErrorCode::ConfigError, "sample_interval must be positive");
    if (opts.predraw_depth < 0) throw Error(ErrorCode::ConfigError, "route pre-draw depth must be >= 0");
    if (opts.replications < 1) throw Error(ErrorCode::ConfigError, "replication count must be >= 1");
    if (opts.counter_cap < 0) throw Error(ErrorCode::ConfigError, "counter cap must be >= 0");
    for (const auto& init : opts.initial) {
        if (init.buffer < 0 || init.buffer >= net.num_buffers() || init.counter < 1 || init.count < 0) {
            throw Error(ErrorCode::ConfigError, "initial jobs need a known buffer, counter >= 1 and count >= 0");
        }
    }
    if (net.spec().synchronized && !is_integral(opts.sample_interval)) {
        throw Error(ErrorCode::IncompatibleSynchronizedPolicyShape,
                    "synchronized networks are sampled at slot boundaries; sample_interval must be an integer");
    }
}

}  // namespace

std::uint64_t AuditReport::total_violations() const {
    return feasibility + maximality + non_preemption + counter_monotonicity + workload_identity + conservation +
           synchronization;
}

double AuditReport::routing_mean() const {
    return routing_events == 0 ? 0.0 : routing_sum / static_cast<double>(routing_events);
}

double AuditReport::routing_stderr() const {
    if (routing_events < 2) return 0.0;
    const double n = static_cast<double>(routing_events);
    const double mean = routing_sum / n;
    const double var = std::max(0.0, (routing_sum_sq - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
}

bool AuditReport::routing_martingale_ok() const {
    return std::abs(routing_mean()) <= 3.0 * routing_stderr() + 1e-12;
}

void AuditReport::merge(const AuditReport& o) {
    batches += o.batches;
    feasibility += o.feasibility;
    maximality += o.maximality;
    non_preemption += o.non_preemption;
    counter_monotonicity += o.counter_monotonicity;
    workload_identity += o.workload_identity;
    conservation += o.conservation;
    synchronization += o.synchronization;
    routing_events += o.routing_events;
    routing_sum += o.routing_sum;
    routing_sum_sq += o.routing_sum_sq;
}

Simulator::Simulator(const ValidatedNetwork& net, PolicyKind policy, SimOptions opts)
    : net_(&net),
      policy_(std::move(policy)),
      opts_(std::move(opts)),
      state_(net, opts_.predraw_depth),
      arrivals_rng_(opts_.seed, "arrivals"),
      service_rng_(opts_.seed, "services"),
      routing_rng_(opts_.seed, "routing"),
      coin_rng_(opts_.seed, "policy-coin"),
      tie_rng_(opts_.seed, "tie-break"),
      shadow_(net.num_activities()) {
    check_options(net, opts_);
    if (const auto* sp = std::get_if<StaticPriority>(&policy_)) priority_ranks(sp->order, net.num_buffers());
    if (const auto* e = std::get_if<EpsLrfs>(&policy_)) {
        if (!(e->epsilon >= 0.0 && e->epsilon <= 1.0)) throw Error(ErrorCode::ConfigError, "epsilon must lie in [0, 1]");
    }
    rnd_.tie_break = opts_.tie_break;
    rnd_.tie_rng = &tie_rng_;
    rnd_.coin_rng = &coin_rng_;

    traj_.seed = opts_.seed;
    traj_.num_buffers = net.num_buffers();
    traj_.counter_cap = opts_.counter_cap;
    traj_.horizon = opts_.horizon;
    if (opts_.sample_hook) traj_.extra_name = opts_.sample_hook_name;

    bool slotted = false;
    for (int i = 0; i < net.num_buffers(); ++i) {
        const auto& a = net.spec().arrivals[i];
        if (a.kind == ArrivalKind::Poisson && a.rate > 0.0) {
            push(arrivals_rng_.exponential(1.0 / a.rate), EventKind::Arrival, i);
        } else if (a.kind == ArrivalKind::Slotted && a.rate > 0.0) {
            slotted = true;
        }
    }
    if (slotted) push(0.0, EventKind::SlotEpoch, -1);

    for (const auto& init : opts_.initial) {
        for (int n = 0; n < init.count; ++n) {
            Job job;
            job.id = state_.next_job_id();
            job.counter = init.counter;
            job.buffer = init.buffer;
            if (opts_.predraw_depth > 0 && init.counter <= opts_.predraw_depth) {
                job.path = draw_route(init.buffer, init.counter);
            }
            state_.enqueue(std::move(job));
        }
    }
    process_instant(0.0, true);
}

void Simulator::push(double time, EventKind kind, int index) { events_q_.push(Event{time, kind, index, seq_++}); }

double Simulator::next_event_time() const {
    return events_q_.empty() ? std::numeric_limits<double>::infinity() : events_q_.top().time;
}

void Simulator::advance(double t) {
    const double dt = t - state_.clock();
    if (dt <= 0.0) return;
    double rate = 0.0;
    for (int j = 0; j < net_->num_activities(); ++j) {
        if (state_.busy(j)) rate += net_->activity(j).beta;
    }
    area_ += state_.norm() * dt - 0.5 * rate * dt * dt;
    state_.advance_to(t);
}

void Simulator::emit_samples_before(double t, bool inclusive) {
    const double limit = opts_.horizon * (1.0 + 1e-12);
    while (true) {
        const double s = static_cast<double>(next_sample_) * opts_.sample_interval;
        if (s > limit) break;
        if (inclusive ? s > t : s >= t) break;
        advance(s);
        SampleRow row;
        row.t = s;
        row.norm = state_.norm();
        row.queue = state_.waiting_per_buffer();
        row.in_service = state_.in_service_per_buffer();
        if (opts_.counter_cap > 0) {
            row.counter_detail.reserve(static_cast<std::size_t>(net_->num_buffers()) * opts_.counter_cap);
            for (int i = 0; i < net_->num_buffers(); ++i) {
                for (int c = 1; c <= opts_.counter_cap; ++c) row.counter_detail.push_back(state_.queue_length(i, c));
            }
        }
        if (opts_.sample_hook) row.extra = opts_.sample_hook(state_);
        traj_.rows.push_back(std::move(row));
        ++next_sample_;
    }
}

int Simulator::sample_next(int buffer) {
    const double u = routing_rng_.uniform();
    double acc = 0.0;
    for (int l = 0; l < net_->num_buffers(); ++l) {
        acc += net_->routing()(buffer, l);
        if (u < acc) return l;
    }
    return -1;
}

std::vector<int> Simulator::draw_route(int first_buffer, int first_counter) {
    // Positions before first_counter are never read; they hold the current buffer.
    std::vector<int> path(first_counter, first_buffer);
    while (static_cast<int>(path.size()) < opts_.predraw_depth) {
        const int next = sample_next(path.back());
        if (next < 0) break;
        path.push_back(next);
    }
    return path;
}

void Simulator::arrive(int buffer, std::vector<int>& touched, double& delta_norm) {
    Job job;
    job.id = state_.next_job_id();
    job.counter = 1;
    job.buffer = buffer;
    job.arrival_time = state_.clock();
    if (opts_.predraw_depth > 0) job.path = draw_route(buffer, 1);
    state_.enqueue(std::move(job));
    delta_norm += 1.0;
    touched.push_back(net_->component_of_buffer(buffer));
}

void Simulator::complete(int activity, std::vector<int>& touched, double& delta_norm) {
    InService rec = state_.release(activity);
    Job job = std::move(rec.job);
    const int depth = opts_.predraw_depth;
    const int old_counter = job.counter;
    const int path_len = static_cast<int>(job.path.size());
    touched.push_back(net_->component_of_buffer(job.buffer));
    if (opts_.audit && (rec.pending || std::abs(rec.end - state_.clock()) > kAuditSlack)) ++audit_.non_preemption;

    int next;
    bool sampled = false;
    if (old_counter < path_len) {
        next = job.path[old_counter];
    } else if (depth > 0 && old_counter == path_len && path_len < depth) {
        next = -1;
    } else {
        next = sample_next(job.buffer);
        sampled = true;
    }

    double weight_before = 0.0;
    const bool tracked = opts_.audit && sampled && job_type(job, depth) != JobType::Type3;
    if (tracked) weight_before = in_service_weight(*net_, job, depth, 0.0);

    if (next < 0) {
        if (tracked) {
            const double inc = -weight_before;
            ++audit_.routing_events;
            audit_.routing_sum += inc;
            audit_.routing_sum_sq += inc * inc;
        }
        return;
    }
    job.counter = old_counter + 1;
    job.buffer = next;
    if (opts_.audit && (job.counter != old_counter + 1 || job.counter < 1)) ++audit_.counter_monotonicity;
    if (tracked) {
        const double inc = waiting_weight(*net_, job, depth) - weight_before;
        ++audit_.routing_events;
        audit_.routing_sum += inc;
        audit_.routing_sum_sq += inc * inc;
    }
    touched.push_back(net_->component_of_buffer(next));
    state_.enqueue(std::move(job));
    delta_norm += 1.0;
}

void Simulator::process_instant(double t, bool all_components) {
    advance(t);
    const double norm_before = opts_.audit ? state_.norm() : 0.0;
    double delta = 0.0;
    std::vector<int> touched;
    while (!events_q_.empty() && events_q_.top().time == t) {
        const Event ev = events_q_.top();
        events_q_.pop();
        ++events_;
        switch (ev.kind) {
            case EventKind::Completion:
                complete(ev.index, touched, delta);
                break;
            case EventKind::Arrival: {
                arrive(ev.index, touched, delta);
                const double rate = net_->spec().arrivals[ev.index].rate;
                push(t + arrivals_rng_.exponential(1.0 / rate), EventKind::Arrival, ev.index);
                break;
            }
            case EventKind::SlotEpoch:
                for (int i = 0; i < net_->num_buffers(); ++i) {
                    const auto& a = net_->spec().arrivals[i];
                    if (a.kind != ArrivalKind::Slotted) continue;
                    const int batch = a.sample_batch(arrivals_rng_);
                    for (int n = 0; n < batch; ++n) arrive(i, touched, delta);
                }
                push(t + 1.0, EventKind::SlotEpoch, -1);
                break;
        }
    }
    if (all_components) {
        touched.clear();
        for (int h = 0; h < net_->num_components(); ++h) touched.push_back(h);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (int h : touched) {
        for (int j : decide(policy_, state_, h, rnd_)) {
            const double service = net_->spec().services[net_->activity(j).buffer].sample(service_rng_);
            state_.set_service(j, service);
            push(state_.slot(j)->end, EventKind::Completion, j);
            delta += service - 1.0;
        }
    }
    if (opts_.audit) audit_instant(t, norm_before + delta, touched);
    if (on_instant) on_instant(*this);
}

void Simulator::audit_instant(double t, double expected_norm, const std::vector<int>& decided) {
    ++audit_.batches;
    const auto& net = *net_;
    const int I = net.num_buffers();
    const int J = net.num_activities();

    std::vector<int> load(net.num_processors(), 0);
    for (int j = 0; j < J; ++j) {
        if (!state_.busy(j)) continue;
        for (int k : net.activity(j).processors) ++load[k];
    }
    for (int k = 0; k < net.num_processors(); ++k) {
        if (load[k] > 1 || load[k] != state_.processor_load(k)) ++audit_.feasibility;
    }
    for (int h : decided) {
        if (!nonmaximal_activities(state_, h).empty()) ++audit_.maximality;
    }

    for (int j = 0; j < J; ++j) {
        const auto& slot = state_.slot(j);
        if (shadow_[j] && shadow_[j]->second > t + kAuditSlack) {
            if (!slot || slot->job.id != shadow_[j]->first || slot->end != shadow_[j]->second) ++audit_.non_preemption;
        }
        if (slot && (slot->pending || !(state_.remaining(j) > 0.0 || slot->service_time == 0.0))) {
            ++audit_.non_preemption;
        }
        shadow_[j] = slot ? std::optional<std::pair<std::uint64_t, double>>({slot->job.id, slot->end}) : std::nullopt;
    }

    const auto v_inc = state_.in_service_per_buffer();
    std::vector<double> v_sum(I, 0.0);
    for (int j = 0; j < J; ++j) {
        if (const auto& slot = state_.slot(j)) {
            v_sum[slot->job.buffer] += std::max(0.0, (slot->end - t) * net.activity(j).beta);
        }
    }
    for (int i = 0; i < I; ++i) {
        int counted = 0;
        for (const auto& [c, q] : state_.queues(i)) {
            counted += static_cast<int>(q.size());
            if (c < 1 || q.front().counter != c || q.back().counter != c) ++audit_.counter_monotonicity;
        }
        const double m = net.mean_service()[i];
        const double w_a = m * state_.queue_length(i) + v_inc[i];
        const double w_b = m * counted + v_sum[i];
        if (std::abs(w_a - w_b) > kAuditSlack * std::max(1.0, std::abs(w_a))) ++audit_.workload_identity;
    }

    const double norm = state_.norm();
    if (std::abs(norm - expected_norm) > kAuditSlack * std::max(1.0, norm)) ++audit_.conservation;

    if (net.spec().synchronized) {
        if (!is_integral(t)) ++audit_.synchronization;
        for (int j = 0; j < J; ++j) {
            const auto& slot = state_.slot(j);
            if (slot && slot->end - slot->start != 1.0) ++audit_.synchronization;
        }
    }
}

bool Simulator::step() {
    if (done_) return false;
    const double t = next_event_time();
    if (t > opts_.horizon) {
        emit_samples_before(opts_.horizon, true);
        advance(opts_.horizon);
        done_ = true;
        return false;
    }
    emit_samples_before(t, false);
    process_instant(t, false);
    return true;
}

void Simulator::run() {
    while (step()) {
    }
}

Trajectory Simulator::finish() {
    run();
    traj_.time_avg_norm = area_ / opts_.horizon;
    traj_.events_processed = events_;
    traj_.final_norm = state_.norm();
    if (opts_.audit) traj_.audit = audit_;
    return std::move(traj_);
}

Trajectory simulate(const ValidatedNetwork& net, const PolicyKind& policy, const SimOptions& opts) {
    Simulator sim(net, policy, opts);
    return sim.finish();
}

std::vector<Trajectory> run_replications(const ValidatedNetwork& net, const PolicyKind& policy,
                                         const SimOptions& opts, unsigned threads) {
    if (opts.replications < 1) throw Error(ErrorCode::ConfigError, "replication count must be >= 1");
    const auto count = static_cast<std::size_t>(opts.replications);
    std::vector<Trajectory> out(count);
    std::vector<std::exception_ptr> errors(count);
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < count; r = next++) {
            try {
                SimOptions local = opts;
                local.seed = opts.seed + r;
                out[r] = simulate(net, policy, local);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace spn
