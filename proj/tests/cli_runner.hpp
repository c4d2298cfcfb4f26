// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Runs the stdgat binary in a scratch directory.

#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "stdgat/io.hpp"

#ifndef STDGAT_CLI_PATH
#error "STDGAT_CLI_PATH must point at the stdgat executable"
#endif

namespace stdgat::testing {

namespace fs = std::filesystem;

class CliRunner {
 public:
  explicit CliRunner(const std::string& name) : dir_(fs::temp_directory_path() / ("stdgat_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~CliRunner() {
    if (!std::getenv("STDGAT_KEEP_TMP")) fs::remove_all(dir_);
  }

  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& rel) const { return dir_ / rel; }
  void write(const std::string& rel, const std::string& text) const { io::write_file_atomic(path(rel), text); }
  std::string read(const std::string& rel) const { return io::read_file(path(rel)); }

  // Returns the exit status. stderr goes to `log.txt` in the scratch dir.
  int run(const std::string& args) const {
    const std::string cmd = std::string("STDGAT_LOG=warn '") + STDGAT_CLI_PATH + "' " + args + " 2>>'" +
                            (dir_ / "log.txt").string() + "' >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

 private:
  fs::path dir_;
};

}  // namespace stdgat::testing
