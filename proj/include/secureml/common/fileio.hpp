#pragma once

#include <filesystem>
#include <string>

#include "secureml/common/bytes.hpp"

namespace secureml {

Bytes read_file(const std::filesystem::path& p);
std::string read_text_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, BytesView data);
void write_file(const std::filesystem::path& p, std::string_view text);

// Write-to-temp plus rename: a crash mid-write leaves the previous file
// intact; readers never observe a half-written file.
void write_file_atomic(const std::filesystem::path& p, BytesView data);

} // namespace secureml
