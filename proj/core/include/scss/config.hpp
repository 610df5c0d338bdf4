#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace scss {

/// Flat key=value configuration. '#' starts a comment; later settings win.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& items() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_grid(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

/// dB value; accepts "inf" / "+inf" for an absent component.
double parse_db(const std::string& text);

/// "a,b,c" lists and "start:stop:step" ranges (inclusive of stop), mixed
/// freely: "-10:-2:2,inf".
std::vector<double> parse_grid(const std::string& text);

/// Shortest round-trippable decimal form, with "inf"/"-inf".
std::string format_number(double v);

}  // namespace scss
