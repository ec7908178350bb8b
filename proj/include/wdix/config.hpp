#pragma once

// Settings resolve as: command-line flag, then WDIX_* environment variable, then
// the JSON config file, then the built-in default.

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "wdix/error.hpp"

namespace wdix {

inline constexpr std::string_view kEnvPrefix = "WDIX_";
inline constexpr std::string_view kDefaultConfigFile = "wdix.json";

class Settings {
 public:
  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

  Settings() : env_(system_env) {}
  explicit Settings(nlohmann::json file, EnvLookup env = system_env)
      : file_(std::move(file)), env_(std::move(env)) {}

  /// Reads a config file; a missing default file is not an error.
  static Settings from_file(const std::filesystem::path& path, bool required,
                            EnvLookup env = system_env) {
    std::ifstream in(path);
    if (!in) {
      if (required) throw Error(ErrorCode::IoFailure, "cannot read config " + path.string());
      return Settings(nlohmann::json::object(), std::move(env));
    }
    try {
      return Settings(nlohmann::json::parse(in), std::move(env));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
    }
  }

  /// `key` is snake_case, e.g. "data_dir" -> flag value, WDIX_DATA_DIR, {"data_dir": ...}.
  std::string resolve(const std::string& key, const std::optional<std::string>& flag,
                      const std::string& fallback) const {
    if (flag) return *flag;
    if (auto v = env_(env_name(key))) return *v;
    if (file_.is_object()) {
      if (auto it = file_.find(key); it != file_.end() && !it->is_null()) {
        return it->is_string() ? it->get<std::string>() : it->dump();
      }
    }
    return fallback;
  }

  static std::string env_name(const std::string& key) {
    std::string out(kEnvPrefix);
    for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return out;
  }

  static std::optional<std::string> system_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str()); v && *v) return std::string(v);
    return std::nullopt;
  }

 private:
  nlohmann::json file_ = nlohmann::json::object();
  EnvLookup env_;
};

}  // namespace wdix
