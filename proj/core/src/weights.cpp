#include "spn/weights.hpp"

#include <algorithm>

namespace spn {

namespace {

// sum_{k=from}^{to} m_{path[k-1]}, 1-based positions.
double path_work(const ValidatedNetwork& net, const Job& job, int from, int to) {
    double s = 0.0;
    for (int k = from; k <= to; ++k) s += net.mean_service()[job.path[k - 1]];
    return s;
}

}  // namespace

JobType job_type(const Job& job, int depth) {
    if (job.counter > depth) return JobType::Type1;
    if (static_cast<int>(job.path.size()) >= depth) return JobType::Type2;
    return JobType::Type3;
}

double waiting_weight(const ValidatedNetwork& net, const Job& job, int depth) {
    switch (job_type(job, depth)) {
        case JobType::Type1:
            return net.expected_work()[job.buffer];
        case JobType::Type2:
            return net.continuation_work()[job.path[depth - 1]] + path_work(net, job, job.counter, depth);
        case JobType::Type3:
            return path_work(net, job, job.counter, static_cast<int>(job.path.size()));
    }
    return 0.0;
}

double in_service_weight(const ValidatedNetwork& net, const Job& job, int depth, double remaining) {
    switch (job_type(job, depth)) {
        case JobType::Type1:
            return remaining + net.continuation_work()[job.buffer];
        case JobType::Type2:
            return remaining + net.continuation_work()[job.path[depth - 1]] +
                   path_work(net, job, job.counter + 1, depth);
        case JobType::Type3:
            return remaining + path_work(net, job, job.counter + 1, static_cast<int>(job.path.size()));
    }
    return 0.0;
}

}  // namespace spn
