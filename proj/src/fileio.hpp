#pragma once

#include <string>
#include <vector>

namespace dgp {

std::vector<unsigned char> read_file(const std::string& path);
// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::string& path, const std::vector<unsigned char>& bytes);
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace dgp
