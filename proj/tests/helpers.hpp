#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "deasel/error.hpp"

namespace testutil {

// Fresh scratch directory per test case, removed on destruction.
class ScratchDir {
 public:
  ScratchDir() {
    auto base = std::filesystem::temp_directory_path();
    static std::mt19937_64 gen(std::random_device{}());
    dir_ = base / ("deasel_test_" + std::to_string(gen()));
    std::filesystem::create_directories(dir_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class Fn>
deasel::ErrorKind error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const deasel::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected a deasel::Error, none was thrown");
}

}  // namespace testutil
