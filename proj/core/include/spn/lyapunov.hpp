#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "spn/network.hpp"
#include "spn/random.hpp"
#include "spn/schedule.hpp"

namespace spn {

// L(x) = x^T Z x with slack epsilon and drift constants (eta, C):
//   L(w + rho + eps*m - s(u)) <= L(w) - eta*|w|_1 + C   for all w >= 0, u in M(w).
struct QuadraticCertificate {
    Matrix z;
    double epsilon = 0.0;
    double eta = 0.0;
    double c = 0.0;
};

struct Witness {
    SupportPattern pattern;
    ScheduleVector schedule;
    int buffer = 0;
    double coefficient = 0.0;  // (Z delta(u))_i, >= 0 when the certificate fails
};

struct CheckResult {
    bool holds = false;
    double eta = 0.0;
    double c = 0.0;
    // Largest (Z delta(u))_i over supported coordinates; eta = -2 * this.
    double max_coefficient = 0.0;
    std::optional<Witness> witness;
    std::uint64_t schedules_checked = 0;
};

inline constexpr double kStrictTolerance = 1e-12;

// Throws NonSymmetricZ / NegativeEntryZ / InvalidSpec (shape).
void check_matrix(const Matrix& z, int num_buffers);

// rho + eps*m - s(u)
Vector drift_vector(const ValidatedNetwork& net, const ScheduleVector& u, double epsilon);

double quadratic(const Matrix& z, const Vector& x);

// Per-schedule form of the support-pattern reduction: u lies in M(S) iff S
// avoids blocking_buffers(u), so the worst (S, u, i) is the worst u together
// with one unblocked buffer i, witnessed by S = {i}.
CheckResult check_local(const ValidatedNetwork& net, const Matrix& z, double epsilon,
                        std::uint64_t cap = kDefaultEnumerationCap);

// sup{eps >= 0 : check_local holds}; +inf when no constraint binds; empty
// when the certificate already fails at eps = 0.
std::optional<double> max_slack(const ValidatedNetwork& net, const Matrix& z,
                                std::uint64_t cap = kDefaultEnumerationCap);

// Direct evaluation of the drift inequality for one (w, u).
bool drift_inequality_holds(const Matrix& z, const Vector& w, const Vector& delta, double eta, double c);

// Random (w, u) pairs with random support, magnitudes log-uniform in
// [1e-3, 1e4] and u uniform over M(support(w)). Returns the violation count.
std::uint64_t sample_check(const ValidatedNetwork& net, const QuadraticCertificate& cert, std::uint64_t samples,
                           Rng& rng, std::uint64_t cap = kDefaultEnumerationCap);

// w = x * e_i along the witness coordinate, large enough that the drift
// inequality fails for the given (eta, c). The returned w is checked.
Vector violation_scaling(const ValidatedNetwork& net, const Matrix& z, double epsilon, const Witness& witness,
                         double eta, double c);

enum class Condition { C1, C2, C2p, C3, C3p };

Condition parse_condition(std::string_view name);
std::string_view to_string(Condition condition);

bool check_structural(const ValidatedNetwork& net, const Matrix& z, Condition condition);

struct ConstructedCertificate {
    Matrix z;
    std::optional<double> epsilon_bound;  // empty when the load condition fails
};

// Parallel server networks: one squared sum per bipartite component.
ConstructedCertificate construct_psn(const ValidatedNetwork& net);

// Synchronized communication networks: Z(i, l) = |K_i intersect K_l|.
ConstructedCertificate construct_comm(const ValidatedNetwork& net);

}  // namespace spn
