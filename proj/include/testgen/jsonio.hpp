#pragma once

#include <json.hpp>

#include <string>

namespace testgen {

// Insertion-ordered JSON keeps every emitted artifact byte-stable.
using Json = nlohmann::ordered_json;

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace testgen
