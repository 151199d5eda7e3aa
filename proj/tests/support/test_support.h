#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "incidence/accounts.h"

namespace incidence::testing {

// Builds accounts named A0..A{n-1}; supply and statutory are the row sums.
// `fd` may have 1..6 columns; missing components are zero.
IOAccounts MakeAccounts(const Matrix& flows, const Matrix& fd,
                        const Matrix& taxdest, const Vector& margins = {});

// Random balanced accounts. Row sums of flows / supply lie in
// [0, max_intermediate_share]; taxes nonnegative. The first `margin_count`
// activities get random margin shares.
IOAccounts RandomAccounts(std::mt19937_64& rng, int n,
                          double max_intermediate_share = 0.9,
                          int margin_count = 0);

// Creates a fresh directory under the system temp dir; removed on scope exit.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void WriteText(const std::filesystem::path& path, const std::string& text);
std::string ReadText(const std::filesystem::path& path);

std::filesystem::path FixtureDir();

}  // namespace incidence::testing
