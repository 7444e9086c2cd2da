// SPDX-License-Identifier: Apache-2.0
#ifndef FAILSEQ_TEST_TEMP_DIR_HPP
#define FAILSEQ_TEST_TEMP_DIR_HPP

#include <filesystem>
#include <string>

namespace failseq::testkit {

/// A fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace failseq::testkit

#endif
