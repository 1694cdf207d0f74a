#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spn {

enum class ErrorCode {
    InvalidSpec,
    NonConvergentRouting,
    PartitionNotProcessorIndependent,
    SynchronizedShapeViolation,
    EnumerationTooLarge,
    HorizonNonPositive,
    IncompatibleSynchronizedPolicyShape,
    NonSymmetricZ,
    NegativeEntryZ,
    AssumptionA1Violated,
    AssumptionA2Violated,
    AssumptionB1Violated,
    NotSynchronized,
    PredrawDepthInsufficient,
    SlackNonPositive,
    TailSeriesDiverges,
    TrajectoryTooShort,
    InsufficientSamples,
    UnknownExample,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

// Module that owns an error code; used for module-qualified CLI messages.
std::string_view module_of(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct Violation {
    ErrorCode code;
    std::string message;
};

// Raised by validate() with every invariant violation found, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

}  // namespace spn
