#pragma once

#include <stdexcept>
#include <string>

namespace binormal {

enum class ErrorKind {
    Validation,          // bad arguments / precondition violation
    StepSizeUnderflow,
    RangeExceeded,
    WindowTooShort,
    HypothesisViolated,
    DegenerateAxis,
    NotConverging,
    NotContractive,
    NoSignChange,
    RootNotBracketed,
    NegativeDiscriminant,
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Validation:            return "Validation";
        case ErrorKind::StepSizeUnderflow:     return "StepSizeUnderflow";
        case ErrorKind::RangeExceeded:         return "RangeExceeded";
        case ErrorKind::WindowTooShort:        return "WindowTooShort";
        case ErrorKind::HypothesisViolated:    return "HypothesisViolated";
        case ErrorKind::DegenerateAxis:        return "DegenerateAxis";
        case ErrorKind::NotConverging:         return "NotConverging";
        case ErrorKind::NotContractive:        return "NotContractive";
        case ErrorKind::NoSignChange:          return "NoSignChange";
        case ErrorKind::RootNotBracketed:      return "RootNotBracketed";
        case ErrorKind::NegativeDiscriminant:  return "NegativeDiscriminant";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }
    const char* kind_name() const { return error_kind_name(kind_); }

private:
    ErrorKind kind_;
};

} // namespace binormal
