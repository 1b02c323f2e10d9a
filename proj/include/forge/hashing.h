#pragma once

#include <string>
#include <string_view>

namespace forge {

std::string sha256_hex(std::string_view data);

} // namespace forge
