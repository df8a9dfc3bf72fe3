#include "rgi/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rgi {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key=value, got '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
        }
        if (config.has(key)) {
            throw std::runtime_error("config: duplicate key '" + key + "'");
        }
        config.entries_.emplace_back(std::move(key), std::move(value));
    }
    return config;
}

bool ExperimentConfig::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == key; });
}

const std::string& ExperimentConfig::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    throw std::runtime_error("config: missing required key '" + key + "'");
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    std::size_t consumed = 0;
    double parsed = std::stod(v, &consumed);
    if (consumed != v.size()) throw std::runtime_error("config: key '" + key + "' is not a number: " + v);
    return parsed;
}

std::size_t ExperimentConfig::get_size(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    std::size_t consumed = 0;
    unsigned long long parsed = std::stoull(v, &consumed);
    if (consumed != v.size()) throw std::runtime_error("config: key '" + key + "' is not an integer: " + v);
    return static_cast<std::size_t>(parsed);
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    return static_cast<std::uint64_t>(get_size(key, static_cast<std::size_t>(fallback)));
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw std::runtime_error("config: key '" + key + "' is not a boolean: " + v);
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key,
                                                      const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::istringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::runtime_error("config: key '" + key + "' has an empty list");
    return out;
}

std::vector<std::size_t> ExperimentConfig::get_size_list(
    const std::string& key, const std::vector<std::size_t>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::size_t> out;
    std::istringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        out.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
    if (out.empty()) throw std::runtime_error("config: key '" + key + "' has an empty list");
    return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void ExperimentConfig::require_known(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : entries_) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw std::runtime_error("config: unknown key '" + k + "'");
        }
    }
}

std::string ExperimentConfig::echo() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << k << "=" << v << "\n";
    return out.str();
}

}  // namespace rgi
