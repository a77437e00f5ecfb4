#pragma once

#include "licon/config.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace licon {

/// A prerequisite artifact is missing; the message names the expected path
/// and the command that produces it.
class MissingInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Schema of the experiment configuration with desk-scale defaults.
Config experiment_config();

/// "desk" keeps the defaults; "paper" switches to h = 2^-7 and 181 x 181 images.
/// Explicit config values win over either preset.
void apply_scale(Config& cfg, const std::string& scale);

/// gen-data, train, solve-pde, solve-ocp, solve-qmri, verify-errors.
const std::vector<std::string>& command_names();

/// Runs one command against the resolved configuration, writing artifacts
/// under cfg.str("out") and progress lines to `log`. Non-convergence throws
/// SolverError after all outputs are written; training failures throw
/// TrainingError.
void run_command(const std::string& name, const Config& cfg, std::ostream& log);

/// Exit status for an exception escaping run_command: 2 configuration or
/// input errors, 3 solver non-convergence, 4 training failure, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace licon
