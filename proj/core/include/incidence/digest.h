#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "incidence/engine.h"

namespace incidence {

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);
std::string FileSha256(const std::filesystem::path& path);

// Digest of the raw IEEE-754 payload of a, z, idi and fsf (plus shape).
std::string SystemDigest(const CoefficientSystem& system);

}  // namespace incidence
