#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace pert::utf8 {

/// True if `text` is well-formed UTF-8 (no overlongs, no surrogates).
bool valid(std::string_view text);

/// Number of Unicode scalar values in well-formed UTF-8 text.
std::size_t length(std::string_view text);

/// First `n` scalars of `text`; the whole string if it is shorter.
std::string_view prefix(std::string_view text, std::size_t n);

/// Last `n` scalars of `text`; the whole string if it is shorter.
std::string_view suffix(std::string_view text, std::size_t n);

}  // namespace pert::utf8
