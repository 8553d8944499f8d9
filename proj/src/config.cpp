#include "rdt/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rdt {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::config, origin + ":" + std::to_string(lineno) +
                                        ": expected key=value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            fail(ErrorCode::config, origin + ":" + std::to_string(lineno) + ": empty key");
        if (cfg.kv_.count(key))
            fail(ErrorCode::config, origin + ":" + std::to_string(lineno) +
                                        ": duplicate key '" + key + "'");
        cfg.kv_[key] = val;
    }
    return cfg;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

std::string KeyValueConfig::require_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end())
        fail(ErrorCode::config, origin_ + ": missing required key '" + key + "'");
    return it->second;
}

long long KeyValueConfig::get_int(const std::string& key, long long def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    char* end = nullptr;
    long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        fail(ErrorCode::config, origin_ + ": key '" + key + "' is not an integer: '" +
                                    it->second + "'");
    return v;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        fail(ErrorCode::config, origin_ + ": key '" + key + "' is not a number: '" +
                                    it->second + "'");
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    fail(ErrorCode::config, origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
}

void KeyValueConfig::restrict_keys(const std::set<std::string>& allowed) const {
    for (const auto& [key, _] : kv_) {
        if (!allowed.count(key))
            fail(ErrorCode::config, origin_ + ": unknown key '" + key + "'");
    }
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

}  // namespace rdt
