#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rdt/error.hpp"

namespace rdt {

// Plain-text key=value config files. '#' starts a comment, keys are unique,
// whitespace around keys and values is ignored. Callers validate against an
// explicit key set so a typo is reported by name.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& def) const;
    std::string require_string(const std::string& key) const;
    long long get_int(const std::string& key, long long def) const;
    double get_double(const std::string& key, double def) const;
    bool get_bool(const std::string& key, bool def) const;

    // unknown key -> config error naming the key
    void restrict_keys(const std::set<std::string>& allowed) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }
    const std::string& origin() const { return origin_; }

  private:
    std::map<std::string, std::string> kv_;
    std::string origin_;
};

// "a,b,c" -> trimmed parts; empty string -> empty list
std::vector<std::string> split_list(const std::string& s, char sep = ',');

}  // namespace rdt
