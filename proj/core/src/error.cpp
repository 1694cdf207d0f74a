#include "spn/error.hpp"

namespace spn {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::NonConvergentRouting: return "NonConvergentRouting";
        case ErrorCode::PartitionNotProcessorIndependent: return "PartitionNotProcessorIndependent";
        case ErrorCode::SynchronizedShapeViolation: return "SynchronizedShapeViolation";
        case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
        case ErrorCode::HorizonNonPositive: return "HorizonNonPositive";
        case ErrorCode::IncompatibleSynchronizedPolicyShape: return "IncompatibleSynchronizedPolicyShape";
        case ErrorCode::NonSymmetricZ: return "NonSymmetricZ";
        case ErrorCode::NegativeEntryZ: return "NegativeEntryZ";
        case ErrorCode::AssumptionA1Violated: return "AssumptionA1Violated";
        case ErrorCode::AssumptionA2Violated: return "AssumptionA2Violated";
        case ErrorCode::AssumptionB1Violated: return "AssumptionB1Violated";
        case ErrorCode::NotSynchronized: return "NotSynchronized";
        case ErrorCode::PredrawDepthInsufficient: return "PredrawDepthInsufficient";
        case ErrorCode::SlackNonPositive: return "SlackNonPositive";
        case ErrorCode::TailSeriesDiverges: return "TailSeriesDiverges";
        case ErrorCode::TrajectoryTooShort: return "TrajectoryTooShort";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::UnknownExample: return "UnknownExample";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

std::string_view module_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidSpec:
        case ErrorCode::NonConvergentRouting:
        case ErrorCode::PartitionNotProcessorIndependent:
        case ErrorCode::SynchronizedShapeViolation:
            return "network";
        case ErrorCode::EnumerationTooLarge:
            return "scheduling";
        case ErrorCode::HorizonNonPositive:
        case ErrorCode::IncompatibleSynchronizedPolicyShape:
            return "sim";
        case ErrorCode::NonSymmetricZ:
        case ErrorCode::NegativeEntryZ:
        case ErrorCode::AssumptionA1Violated:
        case ErrorCode::AssumptionA2Violated:
        case ErrorCode::AssumptionB1Violated:
        case ErrorCode::NotSynchronized:
            return "lyapunov";
        case ErrorCode::PredrawDepthInsufficient:
        case ErrorCode::SlackNonPositive:
        case ErrorCode::TailSeriesDiverges:
        case ErrorCode::TrajectoryTooShort:
        case ErrorCode::InsufficientSamples:
            return "diagnostics";
        case ErrorCode::UnknownExample:
        case ErrorCode::ConfigError:
            return "cli";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

std::string join_violations(const std::vector<Violation>& vs) {
    std::string out;
    for (const auto& v : vs) {
        if (!out.empty()) out += "; ";
        out += std::string(to_string(v.code)) + " (" + v.message + ")";
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::InvalidSpec : violations.front().code,
            join_violations(violations)),
      violations_(std::move(violations)) {}

}  // namespace spn
