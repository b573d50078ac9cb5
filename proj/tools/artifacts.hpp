#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace psq::cli {

using json = nlohmann::json;

inline constexpr int manifest_format_version = 1;

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Collects a run's files in a hidden sibling directory of the output
// directory and moves them into place only on commit(). Destroying an
// uncommitted Staging removes everything it wrote.
class Staging {
public:
    explicit Staging(std::filesystem::path out_dir);
    ~Staging();
    Staging(const Staging&) = delete;
    Staging& operator=(const Staging&) = delete;

    // name is a plain file name; writing the same name twice is an error.
    void write(const std::string& name, const std::string& bytes);

    const std::filesystem::path& out_dir() const { return out_; }

    // Moves every file into the output directory, then writes manifest.json:
    // `head` plus "files": [{"path", "bytes", "sha256"}] sorted by path.
    // Returns the manifest.
    json commit(json head);

private:
    struct Entry {
        std::size_t bytes = 0;
        std::string sha256;
    };

    std::filesystem::path out_;
    std::filesystem::path stage_;
    std::map<std::string, Entry> files_;
    bool committed_ = false;
};

} // namespace psq::cli
