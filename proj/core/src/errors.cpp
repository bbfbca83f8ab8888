#include "diffatd/errors.hpp"

namespace diffatd {

DimensionMismatch::DimensionMismatch(const std::string& what, std::size_t expected,
                                     std::size_t got)
    : InvalidArgument(what + ": expected dimension " + std::to_string(expected) + ", got " +
                      std::to_string(got)) {}

UnknownLocation::UnknownLocation(std::size_t location, std::size_t count)
    : InvalidArgument("location " + std::to_string(location) + " out of range [0, " +
                      std::to_string(count) + ")") {}

ConfigError::ConfigError(const std::string& key, const std::string& message)
    : InvalidArgument("config key '" + key + "': " + message), key_(key) {}

RepeatMeasurement::RepeatMeasurement(std::size_t location)
    : RuntimeFailure("location " + std::to_string(location) + " was already measured") {}

}  // namespace diffatd
