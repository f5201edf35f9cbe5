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

#include "bfseg/service.hpp"

#include <random>
#include <sstream>
#include <iomanip>

#include <httplib.h>

namespace bfseg {

using nlohmann::json;

Session::Session(std::string id, RasterImage image, RunConfig cfg)
    : config(std::move(cfg)), last_access(Clock::now()), id_(std::move(id)), image_(std::move(image)) {}

std::optional<Session::RunGuard> Session::try_begin_run() {
  bool expected = false;
  if (!busy_.compare_exchange_strong(expected, true)) return std::nullopt;
  return RunGuard(*this);
}

SessionStore::SessionStore(std::chrono::seconds idle_timeout) : idle_timeout_(idle_timeout) {}

std::shared_ptr<Session> SessionStore::create(RasterImage image, RunConfig config) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu_);
  std::ostringstream id;
  id << std::hex << std::setfill('0') << std::setw(16) << rng() << std::setw(8) << ++counter_;
  auto s = std::make_shared<Session>(id.str(), std::move(image), std::move(config));
  sessions_[s->id()] = s;
  return s;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  std::lock_guard slock(it->second->mu);
  it->second->last_access = Clock::now();
  return it->second;
}

std::size_t SessionStore::evict_idle(Clock::time_point now) {
  std::lock_guard lock(mu_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    bool idle = false;
    {
      std::lock_guard slock(it->second->mu);
      idle = now - it->second->last_access > idle_timeout_;
    }
    if (idle && !it->second->busy()) {
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

namespace {

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

/// Latest mask for the session's current config, or Stale.
const SegmentArtifacts& fresh_latest(const Session& s) {
  if (!s.latest) throw Error(ErrorCode::Stale, "no segmentation yet; POST segment first");
  if (s.latest->config_hash != config_hash(s.config.segmentation)) {
    throw Error(ErrorCode::Stale, "parameters changed since the last segmentation; POST segment again");
  }
  return *s.latest;
}

}  // namespace

SegmentArtifacts run_segmentation(Session& s, int threads) {
  auto guard = s.try_begin_run();
  if (!guard) throw Error(ErrorCode::Busy, "a segmentation is already running for this session");
  SegmentationConfig cfg;
  {
    std::lock_guard lock(s.mu);
    cfg = s.config.segmentation;
  }
  const auto t0 = Clock::now();
  SegmentArtifacts art{segment(s.image(), cfg, SegmentOptions{threads}), config_hash(cfg), 0};
  art.segment_ms = elapsed_ms(t0);
  std::lock_guard lock(s.mu);
  s.latest = art;
  s.denoised.reset();
  return art;
}

DenoiseArtifacts run_denoise(Session& s) {
  std::lock_guard lock(s.mu);
  const auto& latest = fresh_latest(s);
  const auto t0 = Clock::now();
  DenoiseArtifacts art{apply_profile(latest.result.mask, s.config.profile),
                       config_hash(s.config.segmentation, s.config.profile), 0};
  art.denoise_ms = elapsed_ms(t0);
  s.denoised = art;
  return art;
}

Bytes export_mask(Session& s) {
  std::lock_guard lock(s.mu);
  const auto& latest = fresh_latest(s);
  const std::string hash = config_hash(s.config.segmentation, s.config.profile);
  if (s.denoised && s.denoised->config_hash == hash) return encode_png(s.denoised->mask.pixels);
  return encode_png(apply_profile(latest.result.mask, s.config.profile).pixels);
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  ServiceOptions opts;
  SessionStore store;
  httplib::Server server;

  explicit Impl(ServiceOptions o) : opts(std::move(o)), store(opts.idle_timeout) { routes(); }

  static void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& code, const std::string& msg) {
    send_json(res, {{"error", code}, {"message", msg}}, status);
  }

  static int status_for(ErrorCode c) {
    switch (c) {
      case ErrorCode::NotFound: return 404;
      case ErrorCode::Busy:
      case ErrorCode::Stale: return 409;
      case ErrorCode::UnsupportedFormat: return 415;
      case ErrorCode::CorruptData: return 400;
      default: return 422;
    }
  }

  static void send_png(httplib::Response& res, const Bytes& png, const std::string& hash) {
    res.status = 200;
    res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
    if (!hash.empty()) res.set_header("X-Config-Hash", hash);
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&, Session&)>;

  /// Wraps a per-session handler: resolves the id and maps errors to statuses.
  httplib::Server::Handler with_session(Handler h) {
    return [this, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      store.evict_idle();
      auto s = store.find(req.path_params.at("id"));
      if (!s) return send_error(res, 404, "NotFound", "unknown session");
      guarded(res, [&] { h(req, res, *s); });
    };
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "BadJson", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  }

  static json params_body(const Session& s) {
    json j = to_json(s.config.segmentation);
    j["config_hash"] = config_hash(s.config.segmentation);
    j["profile"] = to_json(s.config.profile);
    return j;
  }

  void routes() {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"status", "ok"}});
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        store.evict_idle();
        std::string body;
        if (req.is_multipart_form_data()) {
          if (req.has_file("image")) body = req.get_file_value("image").content;
          else if (!req.files.empty()) body = req.files.begin()->second.content;
        } else {
          body = req.body;
        }
        if (body.empty()) throw Error(ErrorCode::InvalidParams, "upload an image in the 'image' form field");
        const auto* data = reinterpret_cast<const std::uint8_t*>(body.data());
        RasterImage img = decode_image(std::span<const std::uint8_t>(data, body.size()));
        const Eigen::Index w = img.width();
        const Eigen::Index h = img.height();
        auto s = store.create(std::move(img));
        std::lock_guard lock(s->mu);
        json out = params_body(*s);
        send_json(res, {{"id", s->id()}, {"width", w}, {"height", h}, {"channels", 3}, {"params", out}}, 201);
      });
    });

    server.Get("/sessions/:id/image", with_session([](auto&, auto& res, Session& s) {
      send_png(res, encode_png(s.image()), "");
    }));

    server.Get("/sessions/:id/params", with_session([](auto&, auto& res, Session& s) {
      std::lock_guard lock(s.mu);
      send_json(res, params_body(s));
    }));

    server.Put("/sessions/:id/params", with_session([](const httplib::Request& req, auto& res, Session& s) {
      const json body = json::parse(req.body);
      std::lock_guard lock(s.mu);
      s.config.segmentation = apply_param_updates(s.config.segmentation, body);
      send_json(res, params_body(s));
    }));

    server.Post("/sessions/:id/segment", with_session([this](auto&, auto& res, Session& s) {
      const SegmentArtifacts art = run_segmentation(s, opts.threads);
      send_json(res, {{"config_hash", art.config_hash},
                      {"timings_ms", {{"segment", art.segment_ms}}},
                      {"foreground_pixels", art.result.mask.count()},
                      {"uncertain_pixels", art.result.uncertainty.count()}});
    }));

    auto artifact = [this](auto pick) {
      return with_session([pick](auto&, auto& res, Session& s) {
        std::lock_guard lock(s.mu);
        if (!s.latest) throw Error(ErrorCode::Stale, "no segmentation yet; POST segment first");
        send_png(res, encode_png(pick(s.latest->result)), s.latest->config_hash);
      });
    };
    server.Get("/sessions/:id/mask", artifact([](const SegmentationResult& r) { return r.mask.pixels; }));
    server.Get("/sessions/:id/uncertainty",
               artifact([](const SegmentationResult& r) { return r.uncertainty.pixels; }));
    server.Get("/sessions/:id/provenance", artifact([](const SegmentationResult& r) { return r.provenance; }));

    server.Get("/sessions/:id/profile", with_session([](auto&, auto& res, Session& s) {
      std::lock_guard lock(s.mu);
      send_json(res, to_json(s.config.profile));
    }));

    server.Put("/sessions/:id/profile", with_session([](const httplib::Request& req, auto& res, Session& s) {
      const json body = json::parse(req.body);
      std::lock_guard lock(s.mu);
      s.config.profile = profile_from_json(body, s.config.profile);
      send_json(res, to_json(s.config.profile));
    }));

    server.Post("/sessions/:id/denoise", with_session([](auto&, auto& res, Session& s) {
      const DenoiseArtifacts art = run_denoise(s);
      send_json(res, {{"config_hash", art.config_hash},
                      {"timings_ms", {{"denoise", art.denoise_ms}}},
                      {"foreground_pixels", art.mask.count()}});
    }));

    server.Get("/sessions/:id/denoised", with_session([](auto&, auto& res, Session& s) {
      std::lock_guard lock(s.mu);
      if (!s.denoised) throw Error(ErrorCode::Stale, "no denoised mask yet; POST denoise first");
      send_png(res, encode_png(s.denoised->mask.pixels), s.denoised->config_hash);
    }));

    server.Get("/sessions/:id/export", with_session([](auto&, auto& res, Session& s) {
      const Bytes png = export_mask(s);
      std::string hash;
      {
        std::lock_guard lock(s.mu);
        hash = config_hash(s.config.segmentation, s.config.profile);
      }
      send_png(res, png, hash);
      res.set_header("Content-Disposition", "attachment; filename=\"mask.png\"");
    }));

    if (!opts.static_dir.empty()) {
      if (!server.set_mount_point("/", opts.static_dir.string())) {
        throw Error(ErrorCode::NotFound, "static asset directory " + opts.static_dir.string());
      }
    }
  }
};

Service::Service(ServiceOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}
Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }
void Service::stop() {
  if (impl_) impl_->server.stop();
}
bool Service::running() const { return impl_->server.is_running(); }
SessionStore& Service::sessions() { return impl_->store; }

}  // namespace bfseg
