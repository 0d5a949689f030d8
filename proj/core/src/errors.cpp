#include "resample_lab/errors.hpp"

namespace resample_lab {

FilterStepError::FilterStepError(std::size_t time_index, const std::string& what)
    : DegenerateWeights("time index " + std::to_string(time_index) + ": " + what),
      time_index_(time_index) {}

}  // namespace resample_lab
