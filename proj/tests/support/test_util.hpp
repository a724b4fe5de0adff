#pragma once

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "secureml/common/bytes.hpp"

namespace testutil {

// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0; attempt < 64; ++attempt) {
            auto candidate = base / ("secureml-test-" + std::to_string(std::random_device{}()));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline secureml::Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
    secureml::Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng());
    return out;
}

} // namespace testutil
