#include "testgen/jsonio.hpp"

#include "testgen/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace testgen {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open for reading: " + path);
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

void save_json_file(const std::string& path, const Json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open for reading: " + path);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("short write: " + path);
  }
}

}  // namespace testgen
