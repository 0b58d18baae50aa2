#pragma once

#include <stdexcept>
#include <string>

namespace ooc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define OOC_DECLARE_ERROR(Name)                  \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    };

OOC_DECLARE_ERROR(InvalidGraph)
OOC_DECLARE_ERROR(NotStronglyConnected)
OOC_DECLARE_ERROR(BracketNotFound)
OOC_DECLARE_ERROR(NonConvexDetected)
OOC_DECLARE_ERROR(InvalidSpectrum)
OOC_DECLARE_ERROR(XiUnderflow)
OOC_DECLARE_ERROR(NotHurwitz)
OOC_DECLARE_ERROR(DegenerateRoots)
OOC_DECLARE_ERROR(SingularSystem)
OOC_DECLARE_ERROR(SingularT)
OOC_DECLARE_ERROR(Unsupported)
OOC_DECLARE_ERROR(InvalidArgument)
OOC_DECLARE_ERROR(SchemaError)
OOC_DECLARE_ERROR(IoError)

#undef OOC_DECLARE_ERROR

// Raised when the integrated state stops being finite.
class Diverged : public Error {
public:
    Diverged(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace ooc
