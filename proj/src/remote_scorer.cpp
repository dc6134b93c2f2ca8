// Copyright 2026 The boxdeform Authors
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

// HTTP and child-process transports for the scoring protocol.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>

#include "boxdeform/error.hpp"
#include "boxdeform/objective.hpp"
#include "httplib.h"

extern char** environ;

namespace boxdeform {

std::string request_to_wire(const ScoreRequest& request) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& v : request.views) {
    if (v.image.width == 0) throw InvalidArgument("request view has no image");
    images.push_back(httplib::detail::base64_encode(encode_png(v.image)));
  }
  return nlohmann::json{{"prompt", request.prompt}, {"images", std::move(images)}}
      .dump();
}

ScoreResponse response_from_wire(const std::string& body,
                                 std::size_t expected_count) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ScorerError(std::string("malformed scorer response: ") + e.what());
  }
  if (!j.is_object()) throw ScorerError("scorer response is not an object");
  if (j.contains("error") && j["error"].is_string())
    throw ScorerError("scorer reported: " + j["error"].get<std::string>());
  auto it = j.find("similarities");
  if (it == j.end() || !it->is_array())
    throw ScorerError("scorer response lacks a similarities array");
  ScoreResponse out;
  for (const auto& s : *it) {
    if (!s.is_number()) throw ScorerError("non-numeric similarity");
    double v = s.get<double>();
    if (!std::isfinite(v)) throw ScorerError("non-finite similarity");
    out.similarities.push_back(v);
  }
  if (out.similarities.size() != expected_count)
    throw ScorerError("scorer returned " + std::to_string(out.similarities.size()) +
                      " similarities for " + std::to_string(expected_count) +
                      " images");
  return out;
}

namespace {

class HttpScorer final : public Scorer {
 public:
  HttpScorer(const std::string& endpoint, std::chrono::milliseconds timeout)
      : endpoint_(endpoint), timeout_(timeout) {
    const std::string scheme = "http://";
    if (endpoint.rfind(scheme, 0) != 0)
      throw InvalidArgument("endpoint must start with http://: " + endpoint);
    std::string rest = endpoint.substr(scheme.size());
    auto slash = rest.find('/');
    host_port_ = rest.substr(0, slash);
    prefix_ = slash == std::string::npos ? "" : rest.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    if (host_port_.empty()) throw InvalidArgument("endpoint has no host: " + endpoint);
  }

  ScoreResponse score(const ScoreRequest& request) override {
    httplib::Client cli(scheme_host_port());
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    auto res = cli.Post(prefix_ + "/score", request_to_wire(request),
                        "application/json");
    if (!res)
      throw ScorerError("POST " + endpoint_ + "/score failed: " +
                        httplib::to_string(res.error()));
    if (res->status != 200)
      throw ScorerError("POST " + endpoint_ + "/score returned HTTP " +
                        std::to_string(res->status));
    return response_from_wire(res->body, request.views.size());
  }
  std::string name() const override { return "http " + endpoint_; }

 private:
  std::string scheme_host_port() const { return "http://" + host_port_; }

  std::string endpoint_;
  std::string host_port_;
  std::string prefix_;
  std::chrono::milliseconds timeout_;
};

class ProcessScorer final : public Scorer {
 public:
  explicit ProcessScorer(const std::string& command) : command_(command) {
    if (command.empty()) throw InvalidArgument("empty scorer command");
    ::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0) throw ScorerError("pipe failed");
    if (::pipe(out_pipe) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw ScorerError("pipe failed");
    }
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&fa, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&fa, in_pipe[1]);
    posix_spawn_file_actions_addclose(&fa, out_pipe[0]);
    const char* argv[] = {"sh", "-c", command_.c_str(), nullptr};
    int rc = ::posix_spawn(&pid_, "/bin/sh", &fa, nullptr,
                           const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&fa);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
    if (rc != 0) {
      pid_ = -1;
      shutdown();
      throw ScorerError("cannot start scorer '" + command_ + "': " + std::strerror(rc));
    }
  }

  ~ProcessScorer() override { shutdown(); }

  ScoreResponse score(const ScoreRequest& request) override {
    if (pid_ < 0) throw ScorerError("scorer process is not running");
    std::string line = request_to_wire(request) + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
      ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw ScorerError("scorer process closed its input");
      off += static_cast<std::size_t>(n);
    }
    return response_from_wire(read_line(), request.views.size());
  }
  std::string name() const override { return "process '" + command_ + "'"; }
  bool concurrent() const override { return false; }

 private:
  std::string read_line() {
    for (;;) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string out = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!out.empty() && out.back() == '\r') out.pop_back();
        if (out.empty()) continue;
        return out;
      }
      char chunk[4096];
      ssize_t n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw ScorerError("scorer process exited before replying");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void shutdown() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        pid_t r = ::waitpid(pid_, &status, WNOHANG);
        if (r == pid_ || r < 0) {
          pid_ = -1;
          return;
        }
        ::usleep(10000);
      }
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  std::string command_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

}  // namespace

std::unique_ptr<Scorer> http_scorer(const std::string& endpoint,
                                    std::chrono::milliseconds timeout) {
  return std::make_unique<HttpScorer>(endpoint, timeout);
}

std::unique_ptr<Scorer> process_scorer(const std::string& command) {
  return std::make_unique<ProcessScorer>(command);
}

}  // namespace boxdeform
