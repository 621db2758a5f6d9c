#include "sindex/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sindex/error.hpp"

namespace sindex {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

nlohmann::json parse_scalar(const std::string& raw, int line_no) {
  const std::string tok = trim(raw);
  if (tok.empty()) raise(errc::parse_error, "line " + std::to_string(line_no) + ": empty value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      raise(errc::parse_error, "line " + std::to_string(line_no) + ": unterminated string");
    return tok.substr(1, tok.size() - 2);
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  long long iv = 0;
  auto ires = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
  if (ires.ec == std::errc() && ires.ptr == tok.data() + tok.size()) return iv;
  double dv = 0.0;
  auto dres = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
  if (dres.ec == std::errc() && dres.ptr == tok.data() + tok.size()) return dv;
  raise(errc::parse_error, "line " + std::to_string(line_no) + ": bad value '" + tok + "'");
}

nlohmann::json parse_value(const std::string& raw, int line_no) {
  const std::string tok = trim(raw);
  if (!tok.empty() && tok.front() == '[') {
    if (tok.back() != ']')
      raise(errc::parse_error, "line " + std::to_string(line_no) + ": unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    const std::string body = tok.substr(1, tok.size() - 2);
    std::string item;
    bool in_string = false;
    for (char c : body) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        arr.push_back(parse_scalar(item, line_no));
        item.clear();
      } else {
        item += c;
      }
    }
    if (!trim(item).empty()) arr.push_back(parse_scalar(item, line_no));
    return arr;
  }
  return parse_scalar(tok, line_no);
}

}  // namespace

nlohmann::json parse_toml_subset(const std::string& text) {
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        raise(errc::parse_error, "line " + std::to_string(line_no) + ": bad table header");
      continue;  // tables only namespace; keys merge into the top level
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      raise(errc::parse_error, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      raise(errc::parse_error, "line " + std::to_string(line_no) + ": empty key");
    out[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return out;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::parse_error, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      raise(errc::parse_error, std::string("JSON config: ") + e.what());
    }
  }
  return parse_toml_subset(text);
}

}  // namespace sindex
