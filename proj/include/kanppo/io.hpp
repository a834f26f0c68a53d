#pragma once

#include <filesystem>
#include <string>

namespace kanppo {

/// Reads a whole file; throws ConfigError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temp file in the same directory plus rename, so readers never
/// observe a partial file. Throws ConfigError on I/O failure.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace kanppo
