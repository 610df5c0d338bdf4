#include "scss/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "scss/types.hpp"

namespace scss {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + t + "'");
  }
  if (used != t.size() || std::isnan(v)) throw std::invalid_argument("not a number: '" + t + "'");
  return v;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    c.set(key, trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_number(get(key, "")) : fallback;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const std::string t = get(key, "");
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer for '" + key + "': " + t);
  }
  if (used != t.size()) throw std::invalid_argument("not an integer for '" + key + "': " + t);
  return v;
}

std::vector<double> Config::get_grid(const std::string& key,
                                     const std::vector<double>& fallback) const {
  return has(key) ? parse_grid(get(key, "")) : fallback;
}

std::vector<std::string> Config::get_list(const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  if (!has(key)) return fallback;
  auto items = split(get(key, ""), ',');
  std::erase_if(items, [](const std::string& s) { return s.empty(); });
  return items;
}

double parse_db(const std::string& text) { return parse_number(text); }

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    if (item.find(':', 1) == std::string::npos) {
      out.push_back(parse_number(item));
      continue;
    }
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step: " + item);
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop)) {
      throw std::invalid_argument("bad range: " + item);
    }
    const bool down = stop < start;
    const auto count = static_cast<long long>(std::floor(std::abs(stop - start) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) {
      out.push_back(down ? start - static_cast<double>(i) * step
                         : start + static_cast<double>(i) * step);
    }
  }
  if (out.empty()) throw std::invalid_argument("empty grid: '" + text + "'");
  return out;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace scss
