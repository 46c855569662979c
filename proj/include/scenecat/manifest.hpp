#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace scenecat {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::string& path);

// Writes manifest JSON ({"files": {name: sha256}}) for the given files
// (paths relative to the manifest's directory).
void write_manifest(const std::string& manifest_path, const std::vector<std::string>& files);

}  // namespace scenecat
