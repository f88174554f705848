#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace stdd {

// Vocabulary index of a token.
using TokenId = std::int32_t;
// Index into the full sequence (prompt + generation region).
using Position = std::size_t;
// 0-based denoising step index.
using StepIndex = std::size_t;

// Window / patience value meaning "never reached" (e.g. a temporal window that
// keeps the warm-up threshold for the whole run).
inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

}  // namespace stdd
