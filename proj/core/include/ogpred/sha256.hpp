#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace ogpred {

/// SHA-256 digest as a lowercase hex string.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path& path);

} // namespace ogpred
