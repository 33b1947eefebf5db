#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ams {

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Plain-text configuration shared by the calibration, parameter, gains,
/// scenario and mission files.
///
///   # comment
///   key = value [unit]
///   record-name field field ...
///
/// Keys are unique. Record lines keep their order.
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    std::string unit;
    std::size_t line = 0;
  };
  struct Record {
    std::string name;
    std::vector<std::string> fields;
    std::size_t line = 0;
  };

  static KeyValueFile parse(std::istream& in);
  static KeyValueFile parse_string(const std::string& text);
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const Entry& entry(const std::string& key) const;
  std::string text(const std::string& key) const { return entry(key).value; }
  std::string text_or(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::optional<double> maybe_number(const std::string& key) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::vector<Record>& records() const { return records_; }

  void set(const std::string& key, const std::string& value, const std::string& unit = {});
  void add_record(Record r) { records_.push_back(std::move(r)); }

 private:
  std::map<std::string, Entry> entries_;
  std::vector<Record> records_;
};

/// Strict decimal parse of a whole token; throws ParseError on trailing junk.
double parse_number(const std::string& token, std::size_t line);

/// Shortest representation that round-trips a double.
std::string format_number(double v);

}  // namespace ams
