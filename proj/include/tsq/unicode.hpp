#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tsq {

/// Decode UTF-8 into scalar values. Rejects overlong forms, surrogates and
/// truncated sequences; the error message names the byte offset.
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(char32_t cp);
std::string encode_utf8(std::u32string_view text);

}  // namespace tsq
