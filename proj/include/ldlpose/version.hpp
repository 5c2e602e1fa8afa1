// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace ldlpose {

inline constexpr const char* kVersion = "1.0.0";

} // namespace ldlpose
