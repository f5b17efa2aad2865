#pragma once

#include <stdexcept>
#include <string>

namespace symdyn {

struct Error : std::runtime_error {
    std::string kind;
    Error(std::string k, const std::string& what) : std::runtime_error(what), kind(std::move(k)) {}
};

#define SYMDYN_ERROR(Name)                                                 \
    struct Name : Error {                                                  \
        explicit Name(const std::string& what) : Error(#Name, what) {}     \
    }

SYMDYN_ERROR(SingularPoint);
SYMDYN_ERROR(WindowExhausted);
SYMDYN_ERROR(TailDiverges);
SYMDYN_ERROR(DomainViolation);
SYMDYN_ERROR(NoNetVertex);
SYMDYN_ERROR(EdgeBroken);
SYMDYN_ERROR(NotDoubleCoding);
SYMDYN_ERROR(EmptyCylinder);
SYMDYN_ERROR(ConfigError);

#undef SYMDYN_ERROR

}  // namespace symdyn
