#pragma once

#include <cstdint>

namespace deepref {

using ItemId = std::uint32_t;
using EdgeId = int;
using StepIndex = std::int64_t;

}  // namespace deepref
