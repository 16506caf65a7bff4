#pragma once

#include <json.hpp>

#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

namespace vcpred {

using json = nlohmann::json;

/// Streams a JSONL file line by line. Parse failures are reported with the
/// 1-based line number. Blank lines are skipped.
inline void for_each_jsonl_line(
    const std::string& path,
    const std::function<void(const json&, int line_no)>& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed JSON line: " + e.what());
    }
    fn(j, line_no);
  }
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  }

  void write(const json& j) { out_ << j.dump() << "\n"; }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

inline std::string require_string(const json& j, const char* field,
                                  const std::string& ctx) {
  if (!j.contains(field) || !j[field].is_string()) {
    throw std::runtime_error(ctx + ": missing or non-string field '" + field +
                             "'");
  }
  return j[field].get<std::string>();
}

}  // namespace vcpred
