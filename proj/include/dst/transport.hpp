// Copyright 2026 The dst Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <filesystem>

#include "dst/session.hpp"

namespace dst {

class BindError : public Error {
 public:
  using Error::Error;
};

/// Longest accepted message line; longer lines get an error reply and are
/// discarded.
inline constexpr std::size_t kMaxLineBytes = 1 << 20;

/// Runs one connection over a pair of file descriptors until the peer
/// closes, sends bye, or `stop` becomes true. The session trace is flushed
/// on every exit path. Returns the number of lines handled.
std::size_t serve_stream(ServiceEngine& engine, int in_fd, int out_fd,
                         const std::atomic<bool>& stop);

/// Listens on a unix stream socket; each accepted connection gets its own
/// thread and Connection. Throws BindError when the path cannot be bound.
class UnixSocketServer {
 public:
  explicit UnixSocketServer(std::filesystem::path path);
  ~UnixSocketServer();
  UnixSocketServer(const UnixSocketServer&) = delete;
  UnixSocketServer& operator=(const UnixSocketServer&) = delete;

  /// Accepts until `stop`, then joins every connection thread.
  void run(ServiceEngine& engine, const std::atomic<bool>& stop);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

}  // namespace dst
