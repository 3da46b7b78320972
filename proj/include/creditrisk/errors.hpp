#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace creditrisk {

// Base for all typed errors. `kind()` is the stable machine-readable name
// that the CLI prints and tests match against.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define CREDITRISK_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& message)                      \
            : Error(#Name, message) {}                                 \
    }

CREDITRISK_DEFINE_ERROR(EmptyClass);
CREDITRISK_DEFINE_ERROR(UnknownColumn);
CREDITRISK_DEFINE_ERROR(IndexOutOfRange);
CREDITRISK_DEFINE_ERROR(ParseError);
CREDITRISK_DEFINE_ERROR(NoTerminalLoans);
CREDITRISK_DEFINE_ERROR(EmptyResult);
CREDITRISK_DEFINE_ERROR(ConstantColumn);
CREDITRISK_DEFINE_ERROR(NonPositiveValue);
CREDITRISK_DEFINE_ERROR(NonPositiveIncome);
CREDITRISK_DEFINE_ERROR(NonPositiveInstallment);
CREDITRISK_DEFINE_ERROR(TooFewSamples);
CREDITRISK_DEFINE_ERROR(EmptyPointSet);
CREDITRISK_DEFINE_ERROR(KTooLarge);
CREDITRISK_DEFINE_ERROR(MinorityTooSmall);
CREDITRISK_DEFINE_ERROR(DegenerateData);
CREDITRISK_DEFINE_ERROR(SingularCovariance);
CREDITRISK_DEFINE_ERROR(DimensionMismatch);
CREDITRISK_DEFINE_ERROR(LengthMismatch);
CREDITRISK_DEFINE_ERROR(UndefinedMetric);
CREDITRISK_DEFINE_ERROR(OneClassOnly);
CREDITRISK_DEFINE_ERROR(InvalidSpec);
CREDITRISK_DEFINE_ERROR(ConfigError);

#undef CREDITRISK_DEFINE_ERROR

} // namespace creditrisk
