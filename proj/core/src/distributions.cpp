#include "spn/distributions.hpp"

#include <cmath>
#include <numeric>

namespace spn {

ServiceDistribution ServiceDistribution::deterministic(double m) {
    ServiceDistribution d;
    d.kind = ServiceKind::Deterministic;
    d.mean_value = m;
    return d;
}

ServiceDistribution ServiceDistribution::exponential(double m) {
    ServiceDistribution d;
    d.kind = ServiceKind::Exponential;
    d.mean_value = m;
    return d;
}

ServiceDistribution ServiceDistribution::uniform(double a, double b) {
    ServiceDistribution d;
    d.kind = ServiceKind::Uniform;
    d.lo = a;
    d.hi = b;
    return d;
}

ServiceDistribution ServiceDistribution::discrete(std::vector<double> values, std::vector<double> probs) {
    ServiceDistribution d;
    d.kind = ServiceKind::Discrete;
    d.values = std::move(values);
    d.probs = std::move(probs);
    return d;
}

double ServiceDistribution::mean() const {
    switch (kind) {
        case ServiceKind::Deterministic:
        case ServiceKind::Exponential:
            return mean_value;
        case ServiceKind::Uniform:
            return 0.5 * (lo + hi);
        case ServiceKind::Discrete: {
            double s = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) s += values[k] * probs[k];
            return s;
        }
    }
    return 0.0;
}

double ServiceDistribution::second_moment() const {
    switch (kind) {
        case ServiceKind::Deterministic:
            return mean_value * mean_value;
        case ServiceKind::Exponential:
            return 2.0 * mean_value * mean_value;
        case ServiceKind::Uniform:
            return (lo * lo + lo * hi + hi * hi) / 3.0;
        case ServiceKind::Discrete: {
            double s = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) s += values[k] * values[k] * probs[k];
            return s;
        }
    }
    return 0.0;
}

double ServiceDistribution::expected_excess(double b) const {
    switch (kind) {
        case ServiceKind::Deterministic:
            return std::max(0.0, mean_value - b);
        case ServiceKind::Exponential:
            if (b <= 0.0) return mean_value - b;
            return mean_value * std::exp(-b / mean_value);
        case ServiceKind::Uniform:
            if (b <= lo) return mean() - b;
            if (b >= hi) return 0.0;
            return (hi - b) * (hi - b) / (2.0 * (hi - lo));
        case ServiceKind::Discrete: {
            double s = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) s += std::max(0.0, values[k] - b) * probs[k];
            return s;
        }
    }
    return 0.0;
}

double ServiceDistribution::sample(Rng& rng) const {
    switch (kind) {
        case ServiceKind::Deterministic:
            return mean_value;
        case ServiceKind::Exponential:
            return rng.exponential(mean_value);
        case ServiceKind::Uniform:
            return rng.uniform(lo, hi);
        case ServiceKind::Discrete: {
            const double u = rng.uniform();
            double acc = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) {
                acc += probs[k];
                if (u < acc) return values[k];
            }
            return values.back();
        }
    }
    return 0.0;
}

std::string ServiceDistribution::check() const {
    switch (kind) {
        case ServiceKind::Deterministic:
        case ServiceKind::Exponential:
            if (!(mean_value > 0.0) || !std::isfinite(mean_value)) return "mean must be positive and finite";
            return {};
        case ServiceKind::Uniform:
            if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi)) return "uniform needs 0 <= a <= b < inf";
            if (!(hi > 0.0)) return "uniform mean must be positive";
            return {};
        case ServiceKind::Discrete: {
            if (values.empty() || values.size() != probs.size()) return "discrete needs matching values/probs";
            for (std::size_t k = 0; k < values.size(); ++k) {
                if (!(values[k] >= 0.0) || !std::isfinite(values[k])) return "discrete values must be >= 0";
                if (!(probs[k] >= 0.0)) return "discrete probabilities must be >= 0";
            }
            const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
            if (std::abs(total - 1.0) > 1e-9) return "discrete probabilities must sum to 1";
            if (!(mean() > 0.0)) return "discrete mean must be positive";
            return {};
        }
    }
    return "unknown service kind";
}

std::string to_string(ServiceKind kind) {
    switch (kind) {
        case ServiceKind::Deterministic: return "deterministic";
        case ServiceKind::Exponential: return "exponential";
        case ServiceKind::Uniform: return "uniform";
        case ServiceKind::Discrete: return "discrete";
    }
    return "unknown";
}

int ArrivalModel::sample_batch(Rng& rng) const {
    if (kind != ArrivalKind::Slotted || rate <= 0.0) return 0;
    const double whole = std::floor(rate);
    return static_cast<int>(whole) + (rng.bernoulli(rate - whole) ? 1 : 0);
}

std::string to_string(ArrivalKind kind) {
    switch (kind) {
        case ArrivalKind::None: return "none";
        case ArrivalKind::Poisson: return "poisson";
        case ArrivalKind::Slotted: return "slotted";
    }
    return "unknown";
}

}  // namespace spn
