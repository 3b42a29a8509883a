#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "dcj/config.hpp"

namespace dcj::cli {

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> events;
    std::optional<double> time_budget;
    std::optional<int> replicas;
    std::optional<double> tol;
    std::optional<int> nmax;
    std::optional<int> ymax;
};

// exit codes: 0 success, 1 verification/validation failure, 2 input error
int cmd_validate(const Options& opt, std::ostream& out);
int cmd_stationary(const Options& opt, std::ostream& out);
int cmd_verify(const Options& opt, std::ostream& out);
int cmd_simulate(const Options& opt, std::ostream& out);
int cmd_report(const Options& opt, std::ostream& out);

/// Loads the config and applies command-line overrides.
LoadedModel load_with_overrides(const Options& opt);

} // namespace dcj::cli
