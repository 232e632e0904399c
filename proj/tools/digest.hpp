#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace tailpca::tools {

struct FileDigest {
  std::uintmax_t bytes = 0;
  std::string sha256;
};

/// Throws std::runtime_error if the file cannot be read.
FileDigest digest_file(const std::filesystem::path& path);

}  // namespace tailpca::tools
