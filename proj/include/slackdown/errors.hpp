// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace slackdown {

/// Bad input: malformed files, unknown keys, out-of-range parameters.
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Simulation or invariant failure (invalid workload handed to the engine,
/// state-machine violations). The CLI maps this to exit code 1.
class SimError : public std::runtime_error {
public:
  explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace slackdown
