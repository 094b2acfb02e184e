#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace seuda {

// Flat key=value config. Lines starting with '#' and blank lines are
// skipped; keys may be dotted (e.g. "source.bg_level").
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        KeyValueConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config: missing '=' at " + path + ":" +
                                         std::to_string(lineno));
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw std::runtime_error("config: missing key '" + key + "'");
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& dflt) const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    double get_double(const std::string& key) const { return std::stod(get_string(key)); }
    double get_double(const std::string& key, double dflt) const {
        return has(key) ? std::stod(get_string(key)) : dflt;
    }
    int get_int(const std::string& key) const { return std::stoi(get_string(key)); }
    int get_int(const std::string& key, int dflt) const {
        return has(key) ? std::stoi(get_string(key)) : dflt;
    }
    long long get_int64(const std::string& key, long long dflt) const {
        return has(key) ? std::stoll(get_string(key)) : dflt;
    }
    bool get_bool(const std::string& key, bool dflt) const {
        if (!has(key)) return dflt;
        const std::string v = get_string(key);
        if (v == "true" || v == "1" || v == "on") return true;
        if (v == "false" || v == "0" || v == "off") return false;
        throw std::runtime_error("config: bad bool for '" + key + "': " + v);
    }

    const std::map<std::string, std::string>& items() const { return values_; }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("config: cannot write " + path);
        for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
};

}  // namespace seuda
