#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#ifndef MOFH6_DATA_DIR
#error "MOFH6_DATA_DIR must be defined"
#endif

namespace testing {

inline std::filesystem::path data_dir() { return MOFH6_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return MOFH6_FIXTURE_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mofh6-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
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

}  // namespace testing
