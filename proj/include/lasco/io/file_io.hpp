#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lasco::io {

std::vector<uint8_t> read_file(const std::string& path);

// temp-file + rename so partially written artifacts never appear
void write_file_atomic(const std::string& path, const void* data, size_t n);
void write_file_atomic(const std::string& path, const std::string& text);

bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);

// Shortest round-trip decimal formatting (deterministic report bytes).
std::string format_double(double x);

}  // namespace lasco::io
