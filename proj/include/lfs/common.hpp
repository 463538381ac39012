#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lfs {

// One exception type per contract violation so callers can catch precisely.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error { using Error::Error; };
struct InvalidGroup : Error { using Error::Error; };
struct InvalidAlpha : Error { using Error::Error; };
struct InvalidAge : Error { using Error::Error; };
struct InvalidGroupPair : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ManifestError : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct IncompatibleCheckpoint : Error { using Error::Error; };
struct BadRequest : Error { using Error::Error; };

using Rng = std::mt19937_64;

}  // namespace lfs
