#include <gtest/gtest.h>

#include "random_spec.hpp"
#include "spn/error.hpp"
#include "spn/examples.hpp"
#include "spn/network.hpp"

namespace spn {
namespace {

NetworkSpec rs() { return make_example("rybko-stolyar").spec; }

// Partial sums of alpha + P^T alpha + (P^T)^2 alpha + ...
Vector series_rates(const Vector& alpha, const Matrix& p) {
    Vector term = alpha, sum = alpha;
    for (int n = 0; n < 2000; ++n) {
        term = p.transpose() * term;
        sum += term;
    }
    return sum;
}

template <class F>
std::vector<ErrorCode> codes_of(F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        std::vector<ErrorCode> out;
        for (const auto& v : e.violations()) out.push_back(v.code);
        return out;
    }
    return {};
}

bool contains(const std::vector<ErrorCode>& codes, ErrorCode c) {
    return std::find(codes.begin(), codes.end(), c) != codes.end();
}

TEST(Network, RybkoStolyarValidates) {
    const auto net = validate(rs());
    EXPECT_EQ(net.num_buffers(), 4);
    EXPECT_EQ(net.num_processors(), 2);
    ASSERT_EQ(net.activities_of_buffer(0).size(), 1u);
    EXPECT_EQ(net.activity(net.activities_of_buffer(0)[0]).processors, std::vector<int>{0});
}

TEST(Network, AbsorbingSelfLoopIsRejected) {
    auto spec = make_example("tandem").spec;
    spec.routing(0, 0) = 1.0;
    spec.routing(0, 1) = 0.0;
    EXPECT_TRUE(contains(codes_of([&] { validate(spec); }), ErrorCode::NonConvergentRouting));
}

TEST(Network, SharedProcessorAcrossComponentsIsRejected) {
    auto spec = rs();
    spec.partition = {{0, 1}, {2, 3}};  // processor 2 serves buffers 2 and 3
    EXPECT_TRUE(contains(codes_of([&] { validate(spec); }), ErrorCode::PartitionNotProcessorIndependent));
}

TEST(Network, ReportsEveryViolation) {
    auto spec = rs();
    spec.routing(1, 0) = 1.5;
    spec.services[1] = ServiceDistribution::deterministic(-1.0);
    spec.activities[2].processors = {7};
    const auto codes = codes_of([&] { validate(spec); });
    EXPECT_GE(codes.size(), 3u);
}

TEST(Network, BufferWithLoadButNoActivityIsRejected) {
    auto spec = rs();
    spec.activities.pop_back();
    EXPECT_FALSE(codes_of([&] { validate(spec); }).empty());
}

TEST(Network, SynchronizedShapeIsChecked) {
    auto spec = make_example("switch-2x2").spec;
    spec.services[0] = ServiceDistribution::exponential(1.0);
    EXPECT_TRUE(contains(codes_of([&] { validate(spec); }), ErrorCode::SynchronizedShapeViolation));
}

TEST(Network, EffectiveRatesIdentity) {
    Vector alpha(2);
    alpha << 2, 3;
    const auto load = effective_rates(alpha, Matrix::Zero(2, 2), Vector::Ones(2));
    EXPECT_DOUBLE_EQ(load.lambda(0), 2.0);
    EXPECT_DOUBLE_EQ(load.lambda(1), 3.0);
}

TEST(Network, EffectiveRatesRybkoStolyar) {
    const auto net = validate(rs());
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(net.load().lambda(i), 1.0, 1e-12);
        EXPECT_NEAR(net.load().rho(i), net.mean_service()(i), 1e-12);
    }
}

TEST(Network, EffectiveRatesPartialRouting) {
    Vector alpha(2);
    alpha << 1, 0;
    Matrix p = Matrix::Zero(2, 2);
    p(0, 1) = 0.5;
    const auto load = effective_rates(alpha, p, Vector::Ones(2));
    EXPECT_NEAR(load.lambda(0), 1.0, 1e-12);
    EXPECT_NEAR(load.lambda(1), 0.5, 1e-12);
}

TEST(Network, EffectiveRatesMatchSeriesOnRandomSpecs) {
    Rng rng(11, "network-test");
    for (int n = 0; n < 50; ++n) {
        const auto net = validate(testing::random_spec(rng));
        const Vector expect = series_rates(net.alpha(), net.routing());
        EXPECT_LT((net.load().lambda - expect).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Network, RoutesBounded) {
    EXPECT_EQ(routes_bounded(Matrix::Zero(3, 3)), 1);
    EXPECT_EQ(routes_bounded(validate(rs()).routing()), 2);
    Matrix loop = Matrix::Zero(2, 2);
    loop(0, 0) = 0.5;
    EXPECT_FALSE(routes_bounded(loop).has_value());
    EXPECT_EQ(routes_bounded(validate(make_example("reentrant-line").spec).routing()), 3);
}

TEST(Network, RoutesBoundedAgreesWithMatrixPowers) {
    Rng rng(12, "network-test");
    for (int n = 0; n < 50; ++n) {
        const auto spec = testing::random_spec(rng);
        const auto d = routes_bounded(spec.routing);
        const int I = spec.num_buffers();
        Matrix power = Matrix::Identity(I, I);
        int first_zero = -1;
        for (int k = 1; k <= I + 1; ++k) {
            power = power * spec.routing;
            if (power.cwiseAbs().maxCoeff() == 0.0) {
                first_zero = k;
                break;
            }
        }
        if (first_zero < 0) {
            EXPECT_FALSE(d.has_value());
        } else {
            EXPECT_EQ(d, first_zero);
        }
    }
}

TEST(Network, SpectralRadiusBoundDominatesEigenvalues) {
    Rng rng(13, "network-test");
    for (int n = 0; n < 50; ++n) {
        const auto spec = testing::random_spec(rng);
        const double bound = spectral_radius_bound(spec.routing);
        if (routes_bounded(spec.routing)) {
            EXPECT_EQ(bound, 0.0);
            continue;
        }
        const double exact = spec.routing.eigenvalues().cwiseAbs().maxCoeff();
        EXPECT_GE(bound, exact - 1e-9);
        EXPECT_LT(bound, 1.0);
    }
}

TEST(Network, ActivityInterchangeable) {
    const auto net = validate(rs());
    for (int i = 0; i < 4; ++i) EXPECT_TRUE(activity_interchangeable(net, i, i));
    EXPECT_TRUE(activity_interchangeable(net, 0, 3));
    EXPECT_FALSE(activity_interchangeable(net, 0, 1));
}

TEST(Network, DefaultPartitionIsFinestProcessorIndependent) {
    auto spec = rs();
    spec.partition.clear();
    const auto net = validate(spec);
    ASSERT_EQ(net.num_components(), 2);
    EXPECT_EQ(net.component_of_buffer(0), net.component_of_buffer(3));
    EXPECT_EQ(net.component_of_buffer(1), net.component_of_buffer(2));
    EXPECT_NE(net.component_of_buffer(0), net.component_of_buffer(1));
}

TEST(Network, ValidateIsIdempotent) {
    Rng rng(14, "network-test");
    for (int n = 0; n < 20; ++n) {
        const auto a = validate(testing::random_spec(rng));
        const auto b = validate(a);
        EXPECT_EQ(a.num_components(), b.num_components());
        EXPECT_EQ(a.load().lambda, b.load().lambda);
        EXPECT_EQ(a.expected_work(), b.expected_work());
        for (int i = 0; i < a.num_buffers(); ++i) EXPECT_EQ(a.component_of_buffer(i), b.component_of_buffer(i));
    }
}

TEST(Network, ComponentsArePairwiseProcessorIndependent) {
    Rng rng(15, "network-test");
    for (int n = 0; n < 50; ++n) {
        const auto net = validate(testing::random_spec(rng));
        for (int i = 0; i < net.num_buffers(); ++i) {
            for (int l = 0; l < net.num_buffers(); ++l) {
                if (net.component_of_buffer(i) != net.component_of_buffer(l)) {
                    EXPECT_TRUE(processor_independent(net, i, l));
                }
            }
        }
    }
}

TEST(Network, ExpandCapacities) {
    auto spec = make_example("single-server-2buf").spec;
    const auto expanded = expand_capacities(spec, {2});
    EXPECT_EQ(expanded.num_processors, 2);
    EXPECT_EQ(expanded.num_activities(), 4);
    EXPECT_NO_THROW(validate(expanded));
}

TEST(Network, ExpectedWorkIsFundamentalTimesMean) {
    const auto net = validate(rs());
    EXPECT_NEAR(net.expected_work()(0), 0.7, 1e-12);
    EXPECT_NEAR(net.expected_work()(1), 0.6, 1e-12);
    EXPECT_NEAR(net.continuation_work()(0), 0.6, 1e-12);
    EXPECT_NEAR(net.continuation_work()(1), 0.0, 1e-12);
}

}  // namespace
}  // namespace spn
