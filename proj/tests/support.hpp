#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "ganimals/taxonomy.hpp"

namespace test_support {

inline const ganimals::Taxonomy& bundled() {
    static const ganimals::Taxonomy tax = ganimals::load_default_taxonomy();
    return tax;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("ganimals-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

} // namespace test_support
