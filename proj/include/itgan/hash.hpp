#pragma once

#include "itgan/features.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace itgan::hash {

// Lowercase hex SHA-256.
std::string sha256(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Hash over the regular files of a directory (sorted by name; name and
// contents both count).
std::string sha256_dir(const std::filesystem::path& dir);

// Hash over a dataset's exact bytes: shape, row-major doubles, labels.
std::string sha256_dataset(const features::Dataset& ds);

}  // namespace itgan::hash
