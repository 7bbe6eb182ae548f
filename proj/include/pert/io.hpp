#pragma once

#include <string>
#include <string_view>

namespace pert {

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file. Throws DataError on I/O failure.
void write_file_atomic(const std::string& path, std::string_view content);

std::string read_file(const std::string& path);

}  // namespace pert
