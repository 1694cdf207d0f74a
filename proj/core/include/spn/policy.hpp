#pragma once

#include <string>
#include <variant>
#include <vector>

#include "spn/random.hpp"
#include "spn/state.hpp"

namespace spn {

struct Lrfs {};

struct EpsLrfs {
    double epsilon = 0.0;  // in [0, 1]
};

// Total order over buffers, highest priority first (0-based buffer ids).
struct StaticPriority {
    std::vector<int> order;
};

using PolicyKind = std::variant<Lrfs, EpsLrfs, StaticPriority>;

std::string policy_name(const PolicyKind& policy);

// Arbitrary choices in the policy text ("ties are broken arbitrarily",
// "choose an arbitrary activity"): lowest index by default, or uniform
// among the tied candidates.
enum class TieBreak { LowestIndex, Random };

struct PolicyRandomness {
    TieBreak tie_break = TieBreak::LowestIndex;
    Rng* tie_rng = nullptr;   // required for TieBreak::Random
    Rng* coin_rng = nullptr;  // eps-LRFS step 3-1 coin
};

// Timers below this are treated as expired; guards t - t_set rounding.
inline constexpr double kTimerZero = 1e-12;

// Each decide function mutates the state by moving waiting jobs into free
// activities of component h and returns the newly assigned activities, in
// assignment order. Service times are drawn by the caller.
std::vector<int> lrfs_decide(SimState& state, int component, const PolicyRandomness& rnd = {});
std::vector<int> eps_lrfs_decide(SimState& state, int component, double epsilon, const PolicyRandomness& rnd);
std::vector<int> static_priority_decide(SimState& state, int component, const std::vector<int>& order);

std::vector<int> decide(const PolicyKind& policy, SimState& state, int component, const PolicyRandomness& rnd);

// Validates the order as a permutation of 0..I-1 and returns rank[i].
std::vector<int> priority_ranks(const std::vector<int>& order, int num_buffers);

// Non-maximal activities of component h with respect to Q^(h).
std::vector<int> nonmaximal_activities(const SimState& state, int component);

}  // namespace spn
