#pragma once

#include <cstdint>
#include <vector>

namespace dgp {

// Cost accounting for one sampling call.
struct SampleTrace {
    std::uint64_t generator_evals = 0;
    std::uint64_t epsnet_evals = 0;
    double wall_ms = 0.0;
    // RMS of the state after each loop step (diagnostic).
    std::vector<double> step_norms;
};

}  // namespace dgp
