#ifndef PGEE_ERRORS_HPP
#define PGEE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pgee {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidDesign : Error { using Error::Error; };
struct DuplicateTreatmentInSequencePeriod : InvalidDesign { using InvalidDesign::InvalidDesign; };
struct TimeOutOfDomain : Error { using Error::Error; };
struct PenaltyOrderTooHigh : Error { using Error::Error; };
struct DegenerateVariance : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct SingularBread : Error { using Error::Error; };
struct DataShapeMismatch : Error { using Error::Error; };
struct ZeroVariance : Error { using Error::Error; };
struct NonFiniteQuasiLikelihood : Error { using Error::Error; };
struct EffectiveDofTooLarge : Error { using Error::Error; };
struct NotEstimable : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct MissingColumn : ConfigError { using ConfigError::ConfigError; };
struct IncompletePanel : ConfigError { using ConfigError::ConfigError; };
struct NonNumericValue : ConfigError { using ConfigError::ConfigError; };

} // namespace pgee

#endif
