#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rgi {

// Plain key=value configuration, one pair per line, '#' comments. Unknown
// keys are rejected by the command that consumes the config.
class ExperimentConfig {
public:
    static ExperimentConfig from_file(const std::filesystem::path& path);
    static ExperimentConfig from_text(const std::string& text);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<std::size_t> get_size_list(const std::string& key,
                                           const std::vector<std::size_t>& fallback) const;

    void set(const std::string& key, const std::string& value);

    // every key must appear in `known`, otherwise an error naming the key
    void require_known(const std::vector<std::string>& known) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    std::string echo() const;  // canonical key=value text of the merged config

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace rgi
