#include "ams/keyvalue.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ams {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

double parse_number(const std::string& token, std::size_t line) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw ParseError(line, "expected a number, got '" + token + "'");
  }
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::to_string(v);
}

KeyValueFile KeyValueFile::parse(std::istream& in) {
  KeyValueFile kv;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (const auto eq = s.find('='); eq != std::string::npos) {
      const std::string key = trim(s.substr(0, eq));
      const auto rhs = split_ws(s.substr(eq + 1));
      if (key.empty() || key.find_first_of(" \t") != std::string::npos) {
        throw ParseError(line, "malformed key in '" + s + "'");
      }
      if (rhs.empty() || rhs.size() > 2) throw ParseError(line, "expected 'key = value [unit]'");
      if (kv.entries_.count(key)) throw ParseError(line, "duplicate key '" + key + "'");
      kv.entries_[key] = Entry{rhs[0], rhs.size() == 2 ? rhs[1] : std::string{}, line};
    } else {
      auto toks = split_ws(s);
      Record r;
      r.name = toks.front();
      r.fields.assign(toks.begin() + 1, toks.end());
      r.line = line;
      kv.records_.push_back(std::move(r));
    }
  }
  return kv;
}

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse(in);
}

const KeyValueFile::Entry& KeyValueFile::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ParseError(0, "missing key '" + key + "'");
  return it->second;
}

std::string KeyValueFile::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

double KeyValueFile::number(const std::string& key) const {
  const Entry& e = entry(key);
  return parse_number(e.value, e.line);
}

double KeyValueFile::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::optional<double> KeyValueFile::maybe_number(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

void KeyValueFile::set(const std::string& key, const std::string& value, const std::string& unit) {
  entries_[key] = Entry{value, unit, 0};
}

}  // namespace ams
