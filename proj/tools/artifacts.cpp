#include "artifacts.hpp"

#include "psq/error.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>

namespace psq::cli {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        out += buf;
    }
    return out;
}

namespace {

fs::path normalized(fs::path p) {
    p = p.lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    if (p.empty()) throw InvalidArgument("output directory is empty");
    return p;
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.close();
    if (!f) throw IoError("write failed: " + path.string());
}

} // namespace

Staging::Staging(fs::path out_dir) : out_(normalized(std::move(out_dir))) {
    stage_ = out_.parent_path() / ("." + out_.filename().string() + ".staging-" + std::to_string(::getpid()));
}

Staging::~Staging() {
    if (committed_) return;
    std::error_code ec;
    fs::remove_all(stage_, ec);
}

void Staging::write(const std::string& name, const std::string& bytes) {
    if (name.empty() || name.find('/') != std::string::npos || name == "manifest.json" || name[0] == '.')
        throw InvalidArgument("bad artifact name '" + name + "'");
    if (files_.count(name)) throw InvalidArgument("artifact written twice: " + name);
    try {
        fs::create_directories(stage_);
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("cannot create staging directory: ") + e.what());
    }
    write_file(stage_ / name, bytes);
    files_[name] = {bytes.size(), sha256_hex(bytes)};
}

json Staging::commit(json head) {
    json files = json::array();
    for (const auto& [name, e] : files_) files.push_back({{"path", name}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    head["files"] = files;
    std::string text = head.dump(2) + "\n";
    try {
        fs::create_directories(stage_);
        write_file(stage_ / "manifest.json", text);
        if (!fs::exists(out_)) {
            if (!out_.parent_path().empty()) fs::create_directories(out_.parent_path());
            fs::rename(stage_, out_);
        } else {
            if (!fs::is_directory(out_)) throw IoError("output path exists and is not a directory: " + out_.string());
            // Manifest last, so a reader never sees it listing files not yet moved.
            for (const auto& [name, e] : files_) fs::rename(stage_ / name, out_ / name);
            fs::rename(stage_ / "manifest.json", out_ / "manifest.json");
            fs::remove(stage_);
        }
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("cannot publish artifacts: ") + e.what());
    }
    committed_ = true;
    return head;
}

} // namespace psq::cli
