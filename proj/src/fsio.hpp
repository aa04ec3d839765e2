#pragma once

#include <string>

namespace pcir {

// Both throw Error(Io) with the path in the message.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace pcir
