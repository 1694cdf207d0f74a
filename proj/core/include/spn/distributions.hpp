#pragma once

#include <string>
#include <vector>

#include "spn/random.hpp"

namespace spn {

enum class ServiceKind { Deterministic, Exponential, Uniform, Discrete };

// Service-time law of one buffer. All supported kinds have closed-form
// first and second moments, so finiteness of E[Γ²] holds by construction.
struct ServiceDistribution {
    ServiceKind kind = ServiceKind::Deterministic;
    double mean_value = 1.0;        // Deterministic, Exponential
    double lo = 0.0, hi = 0.0;      // Uniform[lo, hi]
    std::vector<double> values;     // Discrete support
    std::vector<double> probs;      // Discrete probabilities

    static ServiceDistribution deterministic(double m);
    static ServiceDistribution exponential(double m);
    static ServiceDistribution uniform(double a, double b);
    static ServiceDistribution discrete(std::vector<double> values, std::vector<double> probs);

    double mean() const;
    double second_moment() const;
    // E[(Γ - b)_+]
    double expected_excess(double b) const;
    double sample(Rng& rng) const;

    // Empty when well formed; otherwise a human-readable reason.
    std::string check() const;
};

std::string to_string(ServiceKind kind);

enum class ArrivalKind { None, Poisson, Slotted };

// External arrival stream of one buffer. Slotted streams deliver
// floor(rate) + Bernoulli(frac(rate)) jobs at every integer epoch 0, 1, 2, ...
struct ArrivalModel {
    ArrivalKind kind = ArrivalKind::None;
    double rate = 0.0;

    static ArrivalModel none() { return {}; }
    static ArrivalModel poisson(double rate) { return {ArrivalKind::Poisson, rate}; }
    static ArrivalModel slotted(double rate) { return {ArrivalKind::Slotted, rate}; }

    double nominal_rate() const { return kind == ArrivalKind::None ? 0.0 : rate; }
    int sample_batch(Rng& rng) const;
};

std::string to_string(ArrivalKind kind);

}  // namespace spn
