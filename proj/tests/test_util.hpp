#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace test_util {

/// Scratch directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("euphrates-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace test_util

#include "euphrates/motion.hpp"

namespace test_util {

/// Field with arbitrary in-range MVs and SADs; not the output of any search.
inline euphrates::MotionField random_field(int w, int h, euphrates::MotionParams p, std::mt19937_64& rng) {
    euphrates::MotionField f(w, h, p);
    std::uniform_int_distribution<int> mv(-p.search_range, p.search_range);
    std::uniform_int_distribution<std::uint32_t> sad(0, euphrates::max_sad(p.mb_size));
    for (auto& b : f.blocks()) b = {{mv(rng), mv(rng)}, sad(rng)};
    return f;
}

}  // namespace test_util
