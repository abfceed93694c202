#pragma once

#include <stdexcept>
#include <string>

namespace henonmf {

/// Base class of every failure raised by the library. `kind()` is a short
/// stable tag used by the CLI when it records the failing stage.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define HENONMF_DEFINE_ERROR(Name, tag)                                   \
    class Name : public Error {                                           \
    public:                                                               \
        explicit Name(const std::string& what) : Error(tag, what) {}      \
    };

// point left the unit square of the affine horseshoe
HENONMF_DEFINE_ERROR(EscapeError, "escape")
HENONMF_DEFINE_ERROR(NonInvertibleError, "non-invertible")
HENONMF_DEFINE_ERROR(DegenerateSaddleError, "degenerate-saddle")
HENONMF_DEFINE_ERROR(IllConditionedError, "ill-conditioned")
HENONMF_DEFINE_ERROR(InconclusiveError, "inconclusive")
HENONMF_DEFINE_ERROR(BadBracketError, "bad-bracket")
HENONMF_DEFINE_ERROR(NeutralOrbitError, "neutral-orbit")
HENONMF_DEFINE_ERROR(DiagnosticError, "diagnostic")
HENONMF_DEFINE_ERROR(EmptyEnsembleError, "empty-ensemble")
HENONMF_DEFINE_ERROR(NoRootError, "no-root")
HENONMF_DEFINE_ERROR(DomainError, "domain")
HENONMF_DEFINE_ERROR(ConfigError, "config")

#undef HENONMF_DEFINE_ERROR

}  // namespace henonmf
