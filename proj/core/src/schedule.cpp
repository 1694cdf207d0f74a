#include "spn/schedule.hpp"

#include <algorithm>

#include "spn/error.hpp"

namespace spn {

namespace {

std::vector<int> processor_usage(const ValidatedNetwork& net, const ScheduleVector& u) {
    std::vector<int> load(net.num_processors(), 0);
    for (int j = 0; j < u.size(); ++j) {
        if (!u[j]) continue;
        for (int k : net.activity(j).processors) ++load[k];
    }
    return load;
}

bool maximal_given_load(const ValidatedNetwork& net, int j, const std::vector<int>& load) {
    for (int k : net.activity(j).processors) {
        if (load[k] == 1) return true;
    }
    return false;
}

void check_cap(const ValidatedNetwork& net, std::uint64_t cap) {
    const int J = net.num_activities();
    if (J >= 63 || (std::uint64_t{1} << J) > cap) {
        throw Error(ErrorCode::EnumerationTooLarge,
                    "2^" + std::to_string(J) + " candidate schedules exceed the enumeration cap");
    }
}

}  // namespace

SupportPattern SupportPattern::of(std::span<const double> w) {
    SupportPattern p;
    p.s.reserve(w.size());
    for (double x : w) p.s.push_back(x > 0.0 ? 1 : 0);
    return p;
}

SupportPattern SupportPattern::from_mask(std::uint64_t mask, int num_buffers) {
    SupportPattern p;
    p.s.resize(num_buffers);
    for (int i = 0; i < num_buffers; ++i) p.s[i] = (mask >> i) & 1U;
    return p;
}

SupportPattern SupportPattern::all(int num_buffers, bool on) {
    SupportPattern p;
    p.s.assign(num_buffers, on ? 1 : 0);
    return p;
}

bool SupportPattern::empty() const {
    return std::none_of(s.begin(), s.end(), [](std::uint8_t x) { return x != 0; });
}

bool is_feasible(const ValidatedNetwork& net, const ScheduleVector& u) {
    if (u.size() != net.num_activities()) return false;
    const auto load = processor_usage(net, u);
    return std::all_of(load.begin(), load.end(), [](int x) { return x <= 1; });
}

bool is_maximal_activity(const ValidatedNetwork& net, int activity, const ScheduleVector& u) {
    return maximal_given_load(net, activity, processor_usage(net, u));
}

bool is_maximal_wrt(const ValidatedNetwork& net, const ScheduleVector& u, const SupportPattern& pattern) {
    const auto load = processor_usage(net, u);
    for (int j = 0; j < net.num_activities(); ++j) {
        if (!pattern[net.activity(j).buffer]) continue;
        if (!maximal_given_load(net, j, load)) return false;
    }
    return true;
}

bool is_maximal_wrt(const ValidatedNetwork& net, const ScheduleVector& u, std::span<const double> w) {
    return is_maximal_wrt(net, u, SupportPattern::of(w));
}

Vector service_rates(const ValidatedNetwork& net, const ScheduleVector& u) {
    Vector s = Vector::Zero(net.num_buffers());
    for (int j = 0; j < u.size(); ++j) {
        if (u[j]) s[net.activity(j).buffer] += net.activity(j).beta;
    }
    return s;
}

std::vector<ScheduleVector> enumerate_feasible(const ValidatedNetwork& net, std::uint64_t cap) {
    check_cap(net, cap);
    const int J = net.num_activities();
    std::vector<ScheduleVector> out;
    ScheduleVector cur(J);
    std::vector<int> load(net.num_processors(), 0);
    // Depth-first over activities; the exclude branch first keeps the output
    // in lexicographic order.
    auto recurse = [&](auto&& self, int j) -> void {
        if (j == J) {
            out.push_back(cur);
            return;
        }
        self(self, j + 1);
        const auto& ks = net.activity(j).processors;
        if (std::all_of(ks.begin(), ks.end(), [&](int k) { return load[k] == 0; })) {
            for (int k : ks) ++load[k];
            cur.set(j, true);
            self(self, j + 1);
            cur.set(j, false);
            for (int k : ks) --load[k];
        }
    };
    recurse(recurse, 0);
    return out;
}

std::vector<ScheduleVector> enumerate_maximal(const ValidatedNetwork& net, const SupportPattern& pattern,
                                              std::uint64_t cap) {
    auto all = enumerate_feasible(net, cap);
    std::vector<ScheduleVector> out;
    for (auto& u : all) {
        if (is_maximal_wrt(net, u, pattern)) out.push_back(std::move(u));
    }
    return out;
}

std::vector<std::uint8_t> blocking_buffers(const ValidatedNetwork& net, const ScheduleVector& u) {
    const auto load = processor_usage(net, u);
    std::vector<std::uint8_t> out(net.num_buffers(), 0);
    for (int j = 0; j < net.num_activities(); ++j) {
        if (!maximal_given_load(net, j, load)) out[net.activity(j).buffer] = 1;
    }
    return out;
}

}  // namespace spn
