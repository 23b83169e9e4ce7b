#pragma once

#include "hybavg/types.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hybavg {

inline constexpr const char* kSchema = "hybrid-averager/1";

/// Shortest round-trip text for a double (17 significant digits; inf and
/// nan spelled as in TOML).
std::string format_double(double v);

/// One top-level `key = value` record. Keys keep insertion order; the
/// `[metadata]` table is emitted last and carries anything that may differ
/// between otherwise identical runs.
class Record {
 public:
  Record();

  void put(const std::string& key, double v);
  void put(const std::string& key, int v);
  void put(const std::string& key, long v);
  void put(const std::string& key, bool v);
  void put(const std::string& key, const std::string& v);
  void put(const std::string& key, const char* v) { put(key, std::string(v)); }
  void put(const std::string& key, const std::vector<double>& v);
  void put(const std::string& key, const Vector& v);
  void put(const std::string& key, const Matrix& m);  // array of rows
  void put_metadata(const std::string& key, const std::string& v);

  std::string str() const;
  void write(const std::string& path) const;

 private:
  void set(const std::string& key, std::string literal);
  std::vector<std::pair<std::string, std::string>> body_;
  std::vector<std::pair<std::string, std::string>> metadata_;
};

/// Parses `key = value` lines; `#` starts a comment and `[table]` headers
/// prefix subsequent keys with `table.`. Values are returned verbatim
/// (strings keep their quotes).
std::map<std::string, std::string> parse_record(const std::string& text);

/// Comma-separated output with a header row and LF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return text_; }
  void write(const std::string& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

}  // namespace hybavg
