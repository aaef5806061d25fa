#pragma once

// Experiment runner: configs and presets, sweeps, CSV/JSON/SVG publishing,
// and reference comparison.

#include "nhtop/experiments/compare.hpp"
#include "nhtop/experiments/config.hpp"
#include "nhtop/experiments/output.hpp"
#include "nhtop/experiments/plot.hpp"
#include "nhtop/experiments/record.hpp"
#include "nhtop/experiments/run.hpp"

namespace nhtop {

/// Process exit codes shared by the command-line tools.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitIo = 3 };

inline int exit_code_for(const std::vector<SweepRecord>& records) {
    for (const auto& r : records) {
        if (r.failed()) return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace nhtop
