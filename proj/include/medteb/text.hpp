#pragma once

#include <string>
#include <string_view>

namespace medteb {

// Unicode NFC normalization of a UTF-8 string.
std::string nfc(std::string_view utf8);

// Lowercase, collapse whitespace runs to one space, trim, NFC-normalize.
// Tokenization is left to the embedding provider.
std::string preprocess_text(std::string_view utf8);

}  // namespace medteb
