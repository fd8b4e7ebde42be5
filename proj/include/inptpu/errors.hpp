#pragma once

#include <stdexcept>
#include <string>

namespace inptpu {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct ShapeMismatchError : Error { using Error::Error; };
struct EmptyMaskError : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct SpecError : Error { using Error::Error; };

}  // namespace inptpu
