#pragma once

#include <filesystem>
#include <random>
#include <string>

#ifndef EHRENC_FIXTURE_DIR
#error "EHRENC_FIXTURE_DIR must point at tests/fixtures"
#endif

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(EHRENC_FIXTURE_DIR) / name; }

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir()
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("ehrenc-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void copy_fixture(const std::string& name, const std::filesystem::path& to)
{
    std::filesystem::copy(fixture(name), to, std::filesystem::copy_options::recursive | std::filesystem::copy_options::overwrite_existing);
}
