#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spn/distributions.hpp"

namespace spn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Indices are 0-based in memory; config files use 1-based buffer and
// processor numbers.
struct Activity {
    int buffer = 0;
    std::vector<int> processors;
    double beta = 1.0;
};

struct NetworkSpec {
    std::string name;
    int num_processors = 0;
    std::vector<std::string> buffer_names;
    std::vector<ArrivalModel> arrivals;
    std::vector<ServiceDistribution> services;
    std::vector<Activity> activities;
    Matrix routing;                          // P(i, l): probability i -> l
    std::vector<std::vector<int>> partition; // empty: finest processor-independent partition
    bool synchronized = false;

    int num_buffers() const { return static_cast<int>(arrivals.size()); }
    int num_activities() const { return static_cast<int>(activities.size()); }
};

struct EffectiveLoad {
    Vector lambda;  // jobs per unit time
    Vector rho;     // lambda_i * m_i
};

// Effective arrival rates under the flow convention lambda = alpha + P^T lambda.
EffectiveLoad effective_rates(const Vector& alpha, const Matrix& routing, const Vector& mean_service);

// Smallest d with P^d = 0, from the support digraph; empty when it has a cycle.
std::optional<int> routes_bounded(const Matrix& routing);

// Upper bound on the spectral radius of a nonnegative matrix via
// ||P^(2^s)||^(1/2^s), tightened over s.
double spectral_radius_bound(const Matrix& routing);

// Immutable, validated network together with every derived quantity the
// policies and certificates need. Shareable across threads.
class ValidatedNetwork {
public:
    const NetworkSpec& spec() const { return spec_; }

    int num_buffers() const { return spec_.num_buffers(); }
    int num_activities() const { return spec_.num_activities(); }
    int num_processors() const { return spec_.num_processors; }
    int num_components() const { return static_cast<int>(components_.size()); }

    const EffectiveLoad& load() const { return load_; }
    const Vector& alpha() const { return alpha_; }
    const Vector& mean_service() const { return mean_; }
    const Matrix& routing() const { return spec_.routing; }

    const Activity& activity(int j) const { return spec_.activities[j]; }
    const std::vector<int>& activities_of_buffer(int i) const { return by_buffer_[i]; }
    const std::vector<int>& activities_using(int k) const { return by_processor_[k]; }

    int component_of_buffer(int i) const { return buffer_component_[i]; }
    int component_of_activity(int j) const { return buffer_component_[spec_.activities[j].buffer]; }
    const std::vector<int>& component_buffers(int h) const { return components_[h]; }
    const std::vector<int>& component_activities(int h) const { return component_activities_[h]; }
    const std::vector<int>& component_processors(int h) const { return component_processors_[h]; }

    // (I - P)^{-1}
    const Matrix& fundamental() const { return fundamental_; }
    // (I - P)^{-1} m: expected total work of a fresh job waiting in buffer i.
    const Vector& expected_work() const { return expected_work_; }
    // P (I - P)^{-1} m: expected work after leaving buffer i.
    const Vector& continuation_work() const { return continuation_work_; }

    double spectral_radius() const { return spectral_radius_; }
    std::optional<int> route_depth() const { return route_depth_; }

    double beta_min() const;
    double mean_min() const { return mean_.minCoeff(); }
    double mean_max() const { return mean_.maxCoeff(); }

private:
    friend ValidatedNetwork validate(const NetworkSpec& spec);

    NetworkSpec spec_;
    EffectiveLoad load_;
    Vector alpha_;
    Vector mean_;
    std::vector<std::vector<int>> by_buffer_;
    std::vector<std::vector<int>> by_processor_;
    std::vector<std::vector<int>> components_;
    std::vector<int> buffer_component_;
    std::vector<std::vector<int>> component_activities_;
    std::vector<std::vector<int>> component_processors_;
    Matrix fundamental_;
    Vector expected_work_;
    Vector continuation_work_;
    double spectral_radius_ = 0.0;
    std::optional<int> route_depth_;
};

// Throws ValidationError listing every violated invariant.
ValidatedNetwork validate(const NetworkSpec& spec);
inline ValidatedNetwork validate(const ValidatedNetwork& net) { return validate(net.spec()); }

bool activity_interchangeable(const ValidatedNetwork& net, int i, int l);
bool processor_independent(const ValidatedNetwork& net, int i, int l);

// Finest partition whose components are pairwise processor-independent.
std::vector<std::vector<int>> finest_partition(const NetworkSpec& spec);

// Replaces processor k of capacity c_k by c_k unit-capacity copies; every
// activity is duplicated once per combination of copies of its processors.
NetworkSpec expand_capacities(const NetworkSpec& spec, const std::vector<int>& capacities);

}  // namespace spn
