#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spn/network.hpp"

namespace spn {

// Binary activity-employment vector; feasible when every processor is used
// by at most one employed activity.
struct ScheduleVector {
    std::vector<std::uint8_t> u;

    ScheduleVector() = default;
    explicit ScheduleVector(int num_activities) : u(num_activities, 0) {}
    explicit ScheduleVector(std::vector<std::uint8_t> bits) : u(std::move(bits)) {}

    int size() const { return static_cast<int>(u.size()); }
    bool operator[](int j) const { return u[j] != 0; }
    void set(int j, bool on = true) { u[j] = on ? 1 : 0; }

    friend bool operator==(const ScheduleVector&, const ScheduleVector&) = default;
    friend auto operator<=>(const ScheduleVector&, const ScheduleVector&) = default;
};

// Which buffers carry positive weight; M(w) depends on w only through this.
struct SupportPattern {
    std::vector<std::uint8_t> s;

    static SupportPattern of(std::span<const double> w);
    static SupportPattern from_mask(std::uint64_t mask, int num_buffers);
    static SupportPattern all(int num_buffers, bool on);

    bool operator[](int i) const { return s[i] != 0; }
    bool empty() const;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

bool is_feasible(const ValidatedNetwork& net, const ScheduleVector& u);

// Some processor of activity j is saturated under u.
bool is_maximal_activity(const ValidatedNetwork& net, int activity, const ScheduleVector& u);

bool is_maximal_wrt(const ValidatedNetwork& net, const ScheduleVector& u, std::span<const double> w);
bool is_maximal_wrt(const ValidatedNetwork& net, const ScheduleVector& u, const SupportPattern& pattern);

// s(u): per-buffer service rate sum_{j in J_i} u_j beta_j.
Vector service_rates(const ValidatedNetwork& net, const ScheduleVector& u);

// All feasible schedules, in lexicographic order of the activity bits.
std::vector<ScheduleVector> enumerate_feasible(const ValidatedNetwork& net,
                                               std::uint64_t cap = kDefaultEnumerationCap);

// M(pattern). Throws EnumerationTooLarge when 2^J exceeds cap.
std::vector<ScheduleVector> enumerate_maximal(const ValidatedNetwork& net, const SupportPattern& pattern,
                                              std::uint64_t cap = kDefaultEnumerationCap);

// Buffers that own at least one non-maximal activity under u. u belongs to
// M(S) iff S avoids every such buffer.
std::vector<std::uint8_t> blocking_buffers(const ValidatedNetwork& net, const ScheduleVector& u);

}  // namespace spn
