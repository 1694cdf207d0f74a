#include <gtest/gtest.h>

#include "random_spec.hpp"
#include "spn/error.hpp"
#include "spn/examples.hpp"
#include "spn/policy.hpp"
#include "spn/schedule.hpp"

namespace spn {
namespace {

void put(SimState& s, int buffer, int counter, int count = 1) {
    for (int n = 0; n < count; ++n) {
        Job j;
        j.id = s.next_job_id();
        j.buffer = buffer;
        j.counter = counter;
        j.enqueue_seq = s.next_seq();
        s.enqueue(std::move(j));
    }
}

ScheduleVector employed(const SimState& s) {
    ScheduleVector u(s.network().num_activities());
    for (int j = 0; j < u.size(); ++j) u.set(j, s.busy(j));
    return u;
}

void fill_random(SimState& s, Rng& rng) {
    const auto& net = s.network();
    for (int i = 0; i < net.num_buffers(); ++i) {
        if (rng.bernoulli(0.4)) continue;
        const int n = 1 + static_cast<int>(rng.below(4));
        for (int k = 0; k < n; ++k) put(s, i, 1 + static_cast<int>(rng.below(5)));
    }
}

TEST(Policy, EmptyComponentAssignsNothing) {
    const auto net = validate(make_example("rybko-stolyar").spec);
    SimState s(net, 0);
    EXPECT_TRUE(lrfs_decide(s, 0).empty());
    EXPECT_EQ(s.total_waiting(), 0);
}

TEST(Policy, LrfsPrefersFirstBufferOnRybkoStolyar) {
    const auto net = validate(make_example("rybko-stolyar").spec);
    SimState s(net, 0);
    put(s, 0, 1);
    put(s, 3, 2);
    const auto started = lrfs_decide(s, net.component_of_buffer(0));
    ASSERT_EQ(started.size(), 1u);
    EXPECT_EQ(net.activity(started[0]).buffer, 0);
}

TEST(Policy, LrfsSmallestCounterWins) {
    const auto net = validate(make_example("single-server-2buf").spec);
    SimState s(net, 0);
    put(s, 0, 3, 2);
    put(s, 1, 2);
    const auto started = lrfs_decide(s, 0);
    ASSERT_EQ(started.size(), 1u);
    EXPECT_EQ(net.activity(started[0]).buffer, 1);
}

TEST(Policy, EpsZeroMatchesLrfs) {
    Rng rng(31, "policy-test");
    for (int n = 0; n < 200; ++n) {
        const auto net = validate(testing::random_spec(rng));
        SimState a(net, 0);
        fill_random(a, rng);
        SimState b = a;
        Rng coin(1, "coin");
        PolicyRandomness rnd;
        rnd.coin_rng = &coin;
        for (int h = 0; h < net.num_components(); ++h) {
            EXPECT_EQ(lrfs_decide(a, h), eps_lrfs_decide(b, h, 0.0, rnd));
        }
        EXPECT_EQ(employed(a), employed(b));
        for (int i = 0; i < net.num_buffers(); ++i) EXPECT_EQ(a.queue_length(i), b.queue_length(i));
    }
}

TEST(Policy, RunningTimerSkipsTheCoin) {
    const auto net = validate(make_example("single-server-2buf").spec);
    SimState s(net, 0);
    s.set_timer(0);
    s.advance_to(0.6);
    EXPECT_NEAR(s.timer(0), 0.4, 1e-12);
    put(s, 0, 1);
    put(s, 1, 5);
    Rng coin(1, "coin");
    PolicyRandomness rnd;
    rnd.coin_rng = &coin;
    const auto started = eps_lrfs_decide(s, 0, 1.0, rnd);
    ASSERT_EQ(started.size(), 1u);
    EXPECT_EQ(net.activity(started[0]).buffer, 0);
    EXPECT_EQ(s.timer_set_time(0), 0.0);
}

TEST(Policy, ExpiredTimerWithHeadsServesLargestCounter) {
    const auto net = validate(make_example("single-server-2buf").spec);
    SimState s(net, 0);
    s.advance_to(3.0);
    put(s, 0, 1);
    put(s, 1, 5);
    Rng coin(1, "coin");
    PolicyRandomness rnd;
    rnd.coin_rng = &coin;
    const auto started = eps_lrfs_decide(s, 0, 1.0, rnd);
    ASSERT_EQ(started.size(), 1u);
    EXPECT_EQ(net.activity(started[0]).buffer, 1);
    ASSERT_TRUE(s.slot(started[0]).has_value());
    EXPECT_EQ(s.slot(started[0])->job.counter, 5);
    EXPECT_EQ(s.timer_set_time(0), 3.0);
    EXPECT_NEAR(s.timer(0), 1.0, 1e-12);
}

TEST(Policy, StaticPriorityFollowsOrder) {
    const auto net = validate(make_example("rybko-stolyar").spec);
    SimState s(net, 0);
    put(s, 0, 1);
    put(s, 3, 2);
    const auto started = static_priority_decide(s, net.component_of_buffer(0), {3, 1, 0, 2});
    ASSERT_EQ(started.size(), 1u);
    EXPECT_EQ(net.activity(started[0]).buffer, 3);
}

TEST(Policy, StaticPriorityIsWorkConserving) {
    const auto net = validate(make_example("rybko-stolyar").spec);
    SimState s(net, 0);
    put(s, 1, 2);
    const auto started = static_priority_decide(s, net.component_of_buffer(1), {0, 1, 2, 3});
    ASSERT_EQ(started.size(), 1u);
    EXPECT_EQ(net.activity(started[0]).buffer, 1);
}

TEST(Policy, PriorityOrderMustBePermutation) {
    EXPECT_THROW(priority_ranks({0, 0, 1}, 3), Error);
    EXPECT_THROW(priority_ranks({0, 1}, 3), Error);
    EXPECT_EQ(priority_ranks({2, 0, 1}, 3), (std::vector<int>{1, 2, 0}));
}

// Every policy leaves a feasible schedule with no non-maximal activity and
// only moves jobs from queues into service.
TEST(Policy, DecisionsAreFeasibleAndMaximal) {
    Rng rng(32, "policy-test");
    for (int n = 0; n < 300; ++n) {
        const auto net = validate(testing::random_spec(rng));
        std::vector<int> order(net.num_buffers());
        for (int i = 0; i < net.num_buffers(); ++i) order[i] = net.num_buffers() - 1 - i;
        const PolicyKind kinds[] = {Lrfs{}, EpsLrfs{0.5}, StaticPriority{order}};
        for (const auto& kind : kinds) {
            SimState s(net, 0);
            fill_random(s, rng);
            const int before = s.total_waiting();
            Rng coin(n, "coin"), tie(n, "tie");
            PolicyRandomness rnd{TieBreak::Random, &tie, &coin};
            int started = 0;
            for (int h = 0; h < net.num_components(); ++h) {
                started += static_cast<int>(decide(kind, s, h, rnd).size());
                EXPECT_TRUE(nonmaximal_activities(s, h).empty());
            }
            EXPECT_TRUE(is_feasible(net, employed(s)));
            EXPECT_EQ(s.total_waiting(), before - started);
        }
    }
}

}  // namespace
}  // namespace spn
