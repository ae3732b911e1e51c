#pragma once

#include <stdexcept>
#include <string>

namespace dpss {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct AllZeroInput : Error {
    explicit AllZeroInput(const std::string& msg = "all input vectors are numerically zero") : Error(msg) {}
};

struct ZeroPoint : Error {
    explicit ZeroPoint(const std::string& msg = "zero vector is not a valid data point") : Error(msg) {}
};

struct RankMismatch : Error {
    explicit RankMismatch(const std::string& msg = "subspace ranks differ") : Error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg = "ambient dimensions differ") : Error(msg) {}
};

struct InvalidBudget : Error {
    explicit InvalidBudget(const std::string& msg = "invalid privacy parameters") : Error(msg) {}
};

struct MissingNull : Error {
    explicit MissingNull(const std::string& msg = "candidate list has no NULL entry") : Error(msg) {}
};

struct InsufficientData : Error {
    explicit InsufficientData(const std::string& msg = "not enough samples for the requested parameters") : Error(msg) {}
};

struct VerificationFailed : Error {
    explicit VerificationFailed(const std::string& msg = "instance verification failed") : Error(msg) {}
};

struct SelfTestFailed : Error {
    explicit SelfTestFailed(const std::string& msg = "sampler self-test failed") : Error(msg) {}
};

struct NoFeasiblePoint : Error {
    explicit NoFeasiblePoint(const std::string& msg = "no constant tuple meets the thresholds") : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg = "invalid experiment configuration") : Error(msg) {}
};

struct TooManyCandidates : Error {
    explicit TooManyCandidates(const std::string& msg = "candidate enumeration exceeds the configured limit") : Error(msg) {}
};

}  // namespace dpss
