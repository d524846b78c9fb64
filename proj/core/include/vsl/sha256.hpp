#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

#include "vsl/bytes.hpp"

namespace vsl {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);
Digest sha256(std::initializer_list<ByteView> parts);

inline ByteView view(const Digest& d) { return {d.data(), d.size()}; }
std::string to_hex(const Digest& d);
Digest digest_from_hex(std::string_view hex);

}  // namespace vsl
