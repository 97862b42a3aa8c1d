#pragma once

#include <stdexcept>
#include <string>

namespace evconvex {

// Base class for all library errors. Concrete types exist so callers can
// distinguish failure modes without string matching.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define EVCONVEX_DEFINE_ERROR(Name)                                   \
    struct Name : Error {                                             \
        explicit Name(const std::string& msg) : Error(msg) {}         \
    }

EVCONVEX_DEFINE_ERROR(InvalidMatrix);
EVCONVEX_DEFINE_ERROR(DimError);
EVCONVEX_DEFINE_ERROR(DegenerateInput);
EVCONVEX_DEFINE_ERROR(DomainError);
EVCONVEX_DEFINE_ERROR(ParamError);
EVCONVEX_DEFINE_ERROR(NotDecreasing);
EVCONVEX_DEFINE_ERROR(OutsideDomain);
EVCONVEX_DEFINE_ERROR(WrongMarginal);
EVCONVEX_DEFINE_ERROR(MissingTheta);
EVCONVEX_DEFINE_ERROR(AssumptionViolated);
EVCONVEX_DEFINE_ERROR(InfeasibleBuild);
EVCONVEX_DEFINE_ERROR(MethodUnavailable);
EVCONVEX_DEFINE_ERROR(OutsideX);
EVCONVEX_DEFINE_ERROR(SamplingExhausted);
EVCONVEX_DEFINE_ERROR(NotCertified);
EVCONVEX_DEFINE_ERROR(Infeasible);
EVCONVEX_DEFINE_ERROR(ConfigError);

#undef EVCONVEX_DEFINE_ERROR

}  // namespace evconvex
