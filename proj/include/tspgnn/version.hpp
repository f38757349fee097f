// Copyright (c) 2026 the tspgnn authors. Licensed under the Apache License 2.0.
#pragma once

namespace tspgnn {

inline constexpr const char* kVersion = "tspgnn 0.1.0";

}  // namespace tspgnn
