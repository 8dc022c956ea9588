#pragma once

#include <stdexcept>
#include <string>

namespace mbgan {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define MBGAN_ERROR_TYPE(NAME)                                                 \
    struct NAME : Error {                                                      \
        using Error::Error;                                                    \
    }

MBGAN_ERROR_TYPE(DimensionMismatch);
MBGAN_ERROR_TYPE(TapeMismatch);
MBGAN_ERROR_TYPE(NonFiniteLoss);
MBGAN_ERROR_TYPE(NonFiniteGradient);
MBGAN_ERROR_TYPE(StaticScheduleHasNoGradient);
MBGAN_ERROR_TYPE(IndivisibleBatch);
MBGAN_ERROR_TYPE(EmptyBatch);
MBGAN_ERROR_TYPE(TooFewSamples);
MBGAN_ERROR_TYPE(NonPSDCovariance);
MBGAN_ERROR_TYPE(EmptySequence);
MBGAN_ERROR_TYPE(ConfigInvalid);
MBGAN_ERROR_TYPE(IoError);
MBGAN_ERROR_TYPE(CheckpointCorrupt);
MBGAN_ERROR_TYPE(ShapeMismatch);

#undef MBGAN_ERROR_TYPE

} // namespace mbgan
