// errors.hpp: exception types shared by the rabi lab modules.
//
// Every failure carries a short machine-readable name (e.g. "NearZoneBoundary")
// that the command-line front end prints verbatim. Validation problems derive
// from ValidationError and map to exit status 1; everything else is a
// numerical failure and maps to exit status 2.

#pragma once

#include <stdexcept>
#include <string>

namespace rabi {

class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("ValidationError", what) {}
};

class NumericalError : public Error {
public:
    NumericalError(std::string name, const std::string& what) : Error(std::move(name), what) {}
};

#define RABI_NUMERICAL_ERROR(Type)                                                 \
    class Type : public NumericalError {                                           \
    public:                                                                        \
        explicit Type(const std::string& what) : NumericalError(#Type, what) {}    \
    };

RABI_NUMERICAL_ERROR(NearZoneBoundary)
RABI_NUMERICAL_ERROR(IllConditioned)
RABI_NUMERICAL_ERROR(NotConverged)
RABI_NUMERICAL_ERROR(SpectrumNotImaginary)
RABI_NUMERICAL_ERROR(ImaginaryResidue)
RABI_NUMERICAL_ERROR(IntegratorFailure)
RABI_NUMERICAL_ERROR(NoBracket)
RABI_NUMERICAL_ERROR(DerivativeFailure)
RABI_NUMERICAL_ERROR(RankDeficientFit)
RABI_NUMERICAL_ERROR(DegenerateCollapse)
RABI_NUMERICAL_ERROR(SmallDenominator)
RABI_NUMERICAL_ERROR(CutoffReflection)
RABI_NUMERICAL_ERROR(PeaksUnresolved)

#undef RABI_NUMERICAL_ERROR

}  // namespace rabi
