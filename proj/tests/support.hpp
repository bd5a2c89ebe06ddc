#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pumphi/error.hpp"
#include "pumphi/features.hpp"
#include "pumphi/random.hpp"

namespace testing_support {

// Runs `stmt` and checks it throws pumphi::Error with the given code.
#define EXPECT_PUMPHI_ERROR(stmt, errc)                                   \
  do {                                                                    \
    try {                                                                 \
      stmt;                                                               \
      ADD_FAILURE() << "expected " << pumphi::errc_name(errc);            \
    } catch (const pumphi::Error& e) {                                    \
      EXPECT_EQ(e.code(), errc) << e.what();                              \
    }                                                                     \
  } while (0)

inline pumphi::Matrix random_matrix(pumphi::Rng& rng, std::size_t n, std::size_t m, double lo = -1.0,
                                    double hi = 1.0) {
  pumphi::Matrix X(n, m);
  for (auto& v : X.data) v = rng.uniform(lo, hi);
  return X;
}

inline pumphi::Matrix column(std::initializer_list<double> values) {
  pumphi::Matrix X(values.size(), 1);
  std::size_t i = 0;
  for (double v : values) X(i++, 0) = v;
  return X;
}

inline pumphi::SupervisedSet make_set(pumphi::Matrix X, std::vector<double> y) {
  pumphi::SupervisedSet s;
  for (std::size_t j = 0; j < X.cols; ++j) s.names.push_back("f" + std::to_string(j));
  s.X = std::move(X);
  s.y = std::move(y);
  s.meta.resize(s.X.rows);
  return s;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pumphi_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
