#pragma once
// Tiny CSV document: leading '#' comment lines, a header row, string cells.
// No quoting; emitted fields must not contain commas or newlines. Parsing and
// re-emitting a document reproduces it byte for byte.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bft/common.hpp"

namespace bft {

struct CsvDocument {
  std::vector<std::string> comments;  // full lines, including the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string emit() const {
    std::ostringstream out;
    for (const auto& c : comments) out << c << "\n";
    out << join(header) << "\n";
    for (const auto& r : rows) out << join(r) << "\n";
    return out.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for write: " + path);
    out << emit();
    if (!out) throw io_error("write failed: " + path);
  }

  static CsvDocument parse(const std::string& text) {
    CsvDocument doc;
    std::istringstream in(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
      if (!saw_header && !line.empty() && line[0] == '#') {
        doc.comments.push_back(line);
        continue;
      }
      auto cells = split(line);
      if (!saw_header) {
        doc.header = std::move(cells);
        saw_header = true;
      } else {
        doc.rows.push_back(std::move(cells));
      }
    }
    if (!saw_header) throw io_error("CSV has no header row");
    return doc;
  }

  static CsvDocument load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open for read: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw io_error("CSV column not found: " + name);
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    return out;
  }
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    out.push_back(cur);
    return out;
  }
};

}  // namespace bft
