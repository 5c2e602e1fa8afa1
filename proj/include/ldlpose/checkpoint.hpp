// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ldlpose/network.hpp"
#include "ldlpose/trainer.hpp"

namespace ldlpose {

// Checkpoint file "LDLP": magic, u32 format version, network configuration,
// parameters as little-endian doubles, then the Adam state. Round-trips
// byte-exactly.
struct Checkpoint {
  NetworkConfig network;
  TrainState state;
};

void save_checkpoint(const std::string& path, const NetworkConfig& net,
                     const TrainState& state);

Checkpoint load_checkpoint(const std::string& path);

} // namespace ldlpose
