// Copyright 2026 The Energy Arena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "gea/record.hpp"

namespace gea {

namespace detail {

inline void check_appendable(const BattleRecord& record) {
  auto violations = record_violations(record);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v;
    throw Error(ErrorCode::kInvalidRecord, msg);
  }
}

inline void write_all(int fd, const std::string& data, const std::string& path) {
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, path + ": " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace detail

/// Owner of an append-only vote log. Appends are serialized through one
/// mutex and each line goes out in a single O_APPEND write, so concurrent
/// callers never produce torn lines.
class LogWriter {
 public:
  explicit LogWriter(std::filesystem::path path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) {
      throw Error(ErrorCode::kIoError, path_.string() + ": " + std::strerror(errno));
    }
  }
  ~LogWriter() {
    if (fd_ >= 0) ::close(fd_);
  }
  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;

  void append(const BattleRecord& record) {
    detail::check_appendable(record);
    std::string line = serialize_record(record);
    line.push_back('\n');
    std::lock_guard lock(mu_);
    detail::write_all(fd_, line, path_.string());
  }

  void sync() {
    std::lock_guard lock(mu_);
    ::fsync(fd_);
  }

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mu_;
};

inline void append(const std::filesystem::path& log_path, const BattleRecord& record) {
  LogWriter(log_path).append(record);
}

struct LineIssue {
  std::size_t line = 0;  // 1-based
  std::string message;

  friend bool operator==(const LineIssue&, const LineIssue&) = default;
};

struct ReplayResult {
  std::vector<BattleRecord> records;
  std::vector<LineIssue> warnings;
};

enum class ReplayMode { kLenient, kStrict };

namespace detail {

/// Calls fn(line_number, line_text, terminated) for every line in the file.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, path.string() + ": cannot open for reading");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    fn(number, line, !in.eof());
  }
  if (in.bad()) throw Error(ErrorCode::kIoError, path.string() + ": read error");
}

}  // namespace detail

/// Reads the log in file order. Lenient mode skips and reports lines that do
/// not decode to a valid record; strict mode throws MalformedLine on the first.
inline ReplayResult replay(const std::filesystem::path& log_path,
                           ReplayMode mode = ReplayMode::kLenient) {
  ReplayResult out;
  detail::for_each_line(log_path, [&](std::size_t number, const std::string& line,
                                      bool terminated) {
    std::string problem;
    try {
      BattleRecord r = parse_record(line);
      auto violations = record_violations(r);
      if (!terminated) {
        problem = "unterminated final line";
      } else if (!violations.empty()) {
        problem = violations.front();
      } else {
        out.records.push_back(std::move(r));
        return;
      }
    } catch (const Error& e) {
      problem = e.what();
    }
    if (mode == ReplayMode::kStrict) {
      throw Error(ErrorCode::kMalformedLine,
                  log_path.string() + ":" + std::to_string(number) + ": " + problem);
    }
    out.warnings.push_back({number, problem});
  });
  return out;
}

struct LogValidationReport {
  std::size_t lines = 0;
  std::vector<LineIssue> violations;

  [[nodiscard]] bool clean() const { return violations.empty(); }
};

inline LogValidationReport validate_log(const std::filesystem::path& log_path) {
  LogValidationReport report;
  detail::for_each_line(log_path, [&](std::size_t number, const std::string& line,
                                      bool terminated) {
    report.lines = number;
    if (!terminated) report.violations.push_back({number, "unterminated final line"});
    try {
      for (auto& v : record_violations(parse_record(line))) {
        report.violations.push_back({number, std::move(v)});
      }
    } catch (const Error& e) {
      report.violations.push_back({number, e.what()});
    }
  });
  return report;
}

}  // namespace gea
