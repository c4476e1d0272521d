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

#include "dst/transport.hpp"

#include <cerrno>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

namespace dst {

namespace {

constexpr int kPollMillis = 100;

bool write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      const ssize_t m = ::write(fd, data.data() + off, data.size() - off);
      if (m < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<std::size_t>(m);
      continue;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

std::size_t serve_stream(ServiceEngine& engine, int in_fd, int out_fd,
                         const std::atomic<bool>& stop) {
  Connection conn(engine);
  std::string buffer;
  std::size_t handled = 0;
  bool discarding = false;
  char chunk[65536];
  bool open = true;
  while (open && !conn.finished() && !stop.load()) {
    pollfd pfd{in_fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, kPollMillis);
    if (ready < 0) {
      if (errno == EINTR) continue;
      spdlog::error("poll: {}", std::strerror(errno));
      break;
    }
    if (ready == 0) continue;
    const ssize_t n = ::read(in_fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      spdlog::error("read: {}", std::strerror(errno));
      break;
    }
    if (n == 0) {
      open = false;
      // A last line without a newline still counts.
      if (!buffer.empty() && !discarding) buffer.push_back('\n');
    } else {
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos;
         start = nl + 1) {
      if (discarding) {
        discarding = false;
        continue;
      }
      std::string_view line(buffer.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
      ++handled;
      const std::string reply =
          (line.size() > kMaxLineBytes ? serialize(ErrorMsg{"line too long"})
                                       : conn.handle_line(line)) +
          "\n";
      if (!write_all(out_fd, reply)) {
        spdlog::warn("peer went away");
        open = false;
        break;
      }
      if (conn.finished()) break;
    }
    buffer.erase(0, start);
    if (buffer.size() > kMaxLineBytes) {
      buffer.clear();
      discarding = true;
      write_all(out_fd, serialize(ErrorMsg{"line too long"}) + "\n");
    }
  }
  conn.close();
  return handled;
}

UnixSocketServer::UnixSocketServer(std::filesystem::path path)
    : path_(std::move(path)) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const std::string p = path_.string();
  if (p.empty() || p.size() >= sizeof addr.sun_path) {
    throw BindError("socket path too long or empty: " + p);
  }
  std::memcpy(addr.sun_path, p.c_str(), p.size() + 1);
  fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw BindError(std::string("socket: ") + std::strerror(errno));
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw BindError("cannot bind " + p + ": " + why);
  }
  spdlog::info("listening on {}", p);
}

UnixSocketServer::~UnixSocketServer() {
  if (fd_ >= 0) {
    ::close(fd_);
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

void UnixSocketServer::run(ServiceEngine& engine, const std::atomic<bool>& stop) {
  std::vector<std::thread> workers;
  while (!stop.load()) {
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, kPollMillis);
    if (ready < 0 && errno != EINTR) {
      spdlog::error("poll: {}", std::strerror(errno));
      break;
    }
    if (ready <= 0) continue;
    const int client = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (client < 0) {
      if (errno != EINTR && errno != EAGAIN) {
        spdlog::warn("accept: {}", std::strerror(errno));
      }
      continue;
    }
    workers.emplace_back([&engine, &stop, client] {
      try {
        const std::size_t n = serve_stream(engine, client, client, stop);
        spdlog::debug("connection closed after {} lines", n);
      } catch (const std::exception& e) {
        spdlog::error("connection failed: {}", e.what());
      }
      ::close(client);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace dst
