// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "slackdown/engine.hpp"

namespace slackdown::testing {

/// Fixed-timestep reimplementation of the engine semantics used only by
/// tests. Advances a dt-quantized clock, samples every controller grid
/// instant eagerly, and finds occurrences by linear scan instead of an event
/// queue. dt_us must divide the sampling period.
SimResult replay_oracle(const Workload& w, const PolicySpec& policy, const HwConfig& hw,
                        const Rat& dt_us);

} // namespace slackdown::testing
