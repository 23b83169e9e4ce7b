#include "hybavg/record.hpp"

#include "hybavg/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hybavg {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        out += c;
    }
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open " + path + " for writing");
  f << text;
  if (!f) throw InvalidArgument("failed writing " + path);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

Record::Record() { set("schema", quote(kSchema)); }

void Record::set(const std::string& key, std::string literal) {
  for (auto& kv : body_) {
    if (kv.first == key) {
      kv.second = std::move(literal);
      return;
    }
  }
  body_.emplace_back(key, std::move(literal));
}

void Record::put(const std::string& key, double v) { set(key, format_double(v)); }
void Record::put(const std::string& key, int v) { set(key, std::to_string(v)); }
void Record::put(const std::string& key, long v) { set(key, std::to_string(v)); }
void Record::put(const std::string& key, bool v) { set(key, v ? "true" : "false"); }
void Record::put(const std::string& key, const std::string& v) { set(key, quote(v)); }

void Record::put(const std::string& key, const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  set(key, s + "]");
}

void Record::put(const std::string& key, const Vector& v) {
  put(key, std::vector<double>(v.data(), v.data() + v.size()));
}

void Record::put(const std::string& key, const Matrix& m) {
  std::string s = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    s += r ? ", [" : "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) s += (c ? ", " : "") + format_double(m(r, c));
    s += "]";
  }
  set(key, s + "]");
}

void Record::put_metadata(const std::string& key, const std::string& v) {
  metadata_.emplace_back(key, quote(v));
}

std::string Record::str() const {
  std::string out;
  for (const auto& [k, v] : body_) out += k + " = " + v + "\n";
  if (!metadata_.empty()) {
    out += "\n[metadata]\n";
    for (const auto& [k, v] : metadata_) out += k + " = " + v + "\n";
  }
  return out;
}

void Record::write(const std::string& path) const { write_file(path, str()); }

std::map<std::string, std::string> parse_record(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::string table;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      table = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": empty key");
    out[table.empty() ? key : table + "." + key] = trim(line.substr(eq + 1));
  }
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
  text_ += "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InvalidArgument("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
  text_ += "\n";
}

void CsvWriter::write(const std::string& path) const { write_file(path, text_); }

}  // namespace hybavg
