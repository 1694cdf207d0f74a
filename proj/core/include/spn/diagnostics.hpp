#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spn/lyapunov.hpp"
#include "spn/simulator.hpp"
#include "spn/state.hpp"
#include "spn/weights.hpp"

namespace spn {

// W_i = m_i Q_i + V_i
Vector immediate_workload(const SimState& state);

// Counted quantities at one counter level c, per buffer.
struct WorkloadView {
    int counter = 0;
    Vector q_lt;      // Q_{i,<c}
    Vector q_le;      // Q_{i,<=c}
    Vector q_hat_le;  // in or destined for buffer i with counter <= c
    Vector w_lt;      // W_{i,<c}
    Vector w_le;      // W_{i,<=c}
    Vector w_hat_le;  // total workload
};

// Throws PredrawDepthInsufficient when c exceeds the state's pre-draw depth.
WorkloadView counted_workloads(const SimState& state, int c);

struct WeightTable {
    double m1 = 0.0;  // counter > D
    double m2 = 0.0;  // full-length pre-drawn path
    double m3 = 0.0;  // path ending before D

    double total() const { return m1 + m2 + m3; }
};

// Sum over jobs of the per-type weight, aggregated per population.
WeightTable total_weights(const SimState& state, int depth);

// Remaining requirement V^j of every activity.
Vector activity_remaining(const SimState& state);

struct GlobalConstants {
    double b_renewal = 0.0;
    int t = 0;
    double nu = 0.0;
    double gamma = 0.0;
    int d = 0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double upsilon = 0.0;
    double c = 0.0;
    double xi = 0.0;
    double beta_min = 0.0;
    double m_min = 0.0;
    double m_max = 0.0;
    bool bounded_routes = false;
    // inputs, kept for the report
    double epsilon = 0.0;
    double eta = 0.0;
    double c_certificate = 0.0;
    double second_moment_bound = 0.0;  // max_u delta^T Z delta
};

// cert must carry (epsilon, eta, c) from a passing check_local.
GlobalConstants global_constants(const ValidatedNetwork& net, const QuadraticCertificate& cert,
                                 std::uint64_t cap = kDefaultEnumerationCap);

// L_glo(Y(t)). Requires a pre-draw depth of at least constants.d.
double eval_global(const SimState& state, const GlobalConstants& constants, const QuadraticCertificate& cert);

enum class Verdict { Diverging, BoundedEvidence, Inconclusive };
std::string to_string(Verdict verdict);

struct StabilityOptions {
    double slope_threshold = 0.01;
    double ratio = 2.0;
};

struct TrajectoryStability {
    std::uint64_t seed = 0;
    double time_avg_norm = 0.0;
    double tail_slope = 0.0;      // least squares over the final half
    double middle_average = 0.0;  // samples in the middle third
    double tail_average = 0.0;    // samples in the final third
    Verdict verdict = Verdict::Inconclusive;
};

struct StabilityReport {
    std::vector<TrajectoryStability> runs;
    double mean_slope = 0.0;
    double mean_time_avg_norm = 0.0;
    Verdict verdict = Verdict::Inconclusive;  // from the replication means
    int diverging = 0;
    int bounded = 0;
};

// Throws TrajectoryTooShort when a trajectory has fewer than 100 samples.
StabilityReport stability_estimate(const std::vector<Trajectory>& trajectories, const StabilityOptions& opts = {});

struct DriftBin {
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;
    double mean_increment = 0.0;
    double stderr_increment = 0.0;
};

struct DriftReport {
    int stride = 1;  // samples per increment
    std::size_t increments = 0;
    std::vector<DriftBin> bins;  // bins with fewer than 5 samples dropped
    double a = 0.0;              // fit: increment ~ a - b |Y|
    double b = 0.0;
    // top two bins negative with |mean| > 2 stderr
    bool top_bins_negative = false;
    bool drift_consistent = false;
};

// Increments of the sampled extra column over steps of T time units,
// pooled over trajectories. Throws InsufficientSamples below 30 increments.
DriftReport drift_estimate(const std::vector<Trajectory>& trajectories, double t_step, int num_bins = 8,
                           int min_bin_count = 5);

}  // namespace spn
