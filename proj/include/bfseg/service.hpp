/*
   Copyright 2026 The bfseg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "bfseg/config.hpp"
#include "bfseg/image_io.hpp"
#include "bfseg/segmentation.hpp"

namespace bfseg {

using Clock = std::chrono::steady_clock;

struct SegmentArtifacts {
  SegmentationResult result;
  std::string config_hash;
  double segment_ms = 0;
};

struct DenoiseArtifacts {
  BinaryMask mask;
  std::string config_hash;  // segmentation + profile
  double denoise_ms = 0;
};

/// One uploaded image and its tuning state. Fields other than `id` and `image`
/// are guarded by `mu`; `busy` marks an in-flight segmentation.
class Session {
 public:
  Session(std::string id, RasterImage image, RunConfig config);

  const std::string& id() const { return id_; }
  const RasterImage& image() const { return image_; }

  class RunGuard {
   public:
    explicit RunGuard(Session& s) : s_(&s) {}
    RunGuard(RunGuard&& o) noexcept : s_(std::exchange(o.s_, nullptr)) {}
    RunGuard& operator=(RunGuard&&) = delete;
    ~RunGuard() {
      if (s_) s_->busy_.store(false);
    }

   private:
    Session* s_;
  };

  /// Empty when a segmentation is already running on this session.
  std::optional<RunGuard> try_begin_run();
  bool busy() const { return busy_.load(); }

  mutable std::mutex mu;
  RunConfig config;
  std::optional<SegmentArtifacts> latest;
  std::optional<DenoiseArtifacts> denoised;
  Clock::time_point last_access;

 private:
  std::string id_;
  RasterImage image_;
  std::atomic<bool> busy_{false};
};

/// In-memory sessions with idle eviction.
class SessionStore {
 public:
  explicit SessionStore(std::chrono::seconds idle_timeout = std::chrono::minutes(30));

  std::shared_ptr<Session> create(RasterImage image, RunConfig config = {});
  /// Refreshes the idle timer; nullptr for unknown ids.
  std::shared_ptr<Session> find(const std::string& id);
  /// Drops sessions idle past the timeout that are not running. Returns the count.
  std::size_t evict_idle(Clock::time_point now = Clock::now());
  std::size_t size() const;

 private:
  std::chrono::seconds idle_timeout_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

/// Runs the pipeline for the session's current config and stores the stamped
/// result. Throws Error(Busy) when another run holds the session.
SegmentArtifacts run_segmentation(Session& s, int threads = 1);

/// Applies the current profile to the latest mask. Throws Error(Stale) when
/// there is no mask for the current config.
DenoiseArtifacts run_denoise(Session& s);

/// Final mask PNG: the current profile applied to the latest mask. Same bytes
/// as the `segment` command for the same image and parameters.
Bytes export_mask(Session& s);

struct ServiceOptions {
  std::filesystem::path static_dir;
  std::chrono::seconds idle_timeout = std::chrono::minutes(30);
  int threads = 1;
};

/// HTTP front end over a SessionStore; endpoints are listed in docs/api.md.
class Service {
 public:
  explicit Service(ServiceOptions opts = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool listen();
  void stop();
  bool running() const;

  SessionStore& sessions();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bfseg
