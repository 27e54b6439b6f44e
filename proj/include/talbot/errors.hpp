#pragma once

#include <stdexcept>

namespace talbot {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One exception type per failure mode so callers and tests can react narrowly.
#define TALBOT_DEFINE_ERROR(Name) \
  struct Name : Error {           \
    using Error::Error;           \
  }

TALBOT_DEFINE_ERROR(UnderResolved);
TALBOT_DEFINE_ERROR(IncommensurateGrid);
TALBOT_DEFINE_ERROR(GridMismatch);
TALBOT_DEFINE_ERROR(TruncationTooSmall);
TALBOT_DEFINE_ERROR(ComplexSpectrum);
TALBOT_DEFINE_ERROR(SeedNotSolution);
TALBOT_DEFINE_ERROR(SeedVanishes);
TALBOT_DEFINE_ERROR(NotDefective);
TALBOT_DEFINE_ERROR(WidthTooLarge);
TALBOT_DEFINE_ERROR(TiltConditionsViolated);
TALBOT_DEFINE_ERROR(StepNotConverged);
TALBOT_DEFINE_ERROR(NotSecular);
TALBOT_DEFINE_ERROR(NormNotConserved);
TALBOT_DEFINE_ERROR(BlockMismatch);
TALBOT_DEFINE_ERROR(BandwidthExceeded);
TALBOT_DEFINE_ERROR(ValidationError);

#undef TALBOT_DEFINE_ERROR

}  // namespace talbot
