#pragma once

#include <stdexcept>
#include <string>

namespace modloc {

// Every failure carries a stable name so the CLI can print it and tests can match it.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

#define MODLOC_DEFINE_ERROR(Type)                                             \
    struct Type : Error {                                                     \
        explicit Type(const std::string& what) : Error(#Type, what) {}        \
    };

MODLOC_DEFINE_ERROR(InvalidArgument)
MODLOC_DEFINE_ERROR(DecompositionFailure)
MODLOC_DEFINE_ERROR(EigenFailure)
MODLOC_DEFINE_ERROR(QuadratureUnderResolved)
MODLOC_DEFINE_ERROR(SingularH)
MODLOC_DEFINE_ERROR(SpectrumOutOfDomain)
MODLOC_DEFINE_ERROR(SupportEscapesGrid)
MODLOC_DEFINE_ERROR(DegenerateInterval)
MODLOC_DEFINE_ERROR(NyquistViolation)
MODLOC_DEFINE_ERROR(ProjectionLoss)
MODLOC_DEFINE_ERROR(OverflowAbort)
MODLOC_DEFINE_ERROR(FormatError)
MODLOC_DEFINE_ERROR(ConfigError)

#undef MODLOC_DEFINE_ERROR

}  // namespace modloc
