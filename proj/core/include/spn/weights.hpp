#pragma once

#include "spn/network.hpp"
#include "spn/state.hpp"

namespace spn {

// Job classes relative to a pre-draw depth D:
//   Type1: counter > D
//   Type2: on a pre-drawn path of full length D
//   Type3: on a pre-drawn path shorter than D (leaves before counter D)
enum class JobType { Type1, Type2, Type3 };

JobType job_type(const Job& job, int depth);

// Expected total remaining service the job will generate network-wide,
// including its current buffer (job is waiting).
double waiting_weight(const ValidatedNetwork& net, const Job& job, int depth);

// Remaining requirement plus expected work after the current buffer.
double in_service_weight(const ValidatedNetwork& net, const Job& job, int depth, double remaining);

}  // namespace spn
