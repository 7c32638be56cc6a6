// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "ukiyo/service.hpp"

#include <charconv>
#include <cstdio>
#include <random>
#include <span>

#include "httplib.h"
#include "json.hpp"
#include "ukiyo/error.hpp"
#include "ukiyo/image_io.hpp"

namespace ukiyo {

std::string new_session_id() {
  std::random_device entropy;
  std::string id;
  id.reserve(32);
  char buf[9];
  for (int i = 0; i < 4; ++i) {
    const std::uint32_t word = entropy();
    std::snprintf(buf, sizeof buf, "%08x", word);
    id += buf;
  }
  return id;
}

SessionStore::SessionStore(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

std::shared_ptr<const Session> SessionStore::insert(Session session) {
  auto stored = std::make_shared<const Session>(std::move(session));
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(stored->id); it != entries_.end()) {
    order_.erase(it->second.position);
    entries_.erase(it);
  }
  while (entries_.size() >= capacity_) {
    entries_.erase(order_.back());
    order_.pop_back();
  }
  order_.push_front(stored->id);
  entries_.emplace(stored->id, Entry{stored, order_.begin()});
  return stored;
}

std::shared_ptr<const Session> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) return nullptr;
  order_.splice(order_.begin(), order_, it->second.position);
  return it->second.session;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {

constexpr const char* kPngType = "image/png";
constexpr const char* kJsonType = "application/json";

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>ukiyo recolor service</title></head>
<body><h1>ukiyo recolor service</h1>
<p>No workbench bundle configured. Start the server with <code>--static-dir</code>.</p>
<ul>
<li><code>POST /api/decompose?k=6&amp;lambda=0.05&amp;seed=0</code> (multipart field <code>image</code>)</li>
<li><code>GET /api/sessions/{id}/layers/{k}</code></li>
<li><code>POST /api/sessions/{id}/recolor</code></li>
</ul></body></html>
)";

struct HttpError {
  int status;
  std::string message;
};

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", message}}.dump(), kJsonType);
}

template <typename T>
T query_number(const httplib::Request& req, const char* name, T fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string text = req.get_param_value(name);
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw HttpError{400, std::string("query parameter ") + name + " is not a number"};
  return value;
}

nlohmann::json palette_json(const Palette& palette) {
  nlohmann::json colors = nlohmann::json::array();
  for (const auto& c : palette.colors()) colors.push_back({c[0], c[1], c[2]});
  return colors;
}

int status_for(const Error& e) {
  return e.is_io() ? 500 : 400;
}

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceOptions opts) : options(std::move(opts)), store(options.max_sessions) {}

  ServiceOptions options;
  SessionStore store;
  httplib::Server server;

  void install_routes();
  void decompose(const httplib::Request& req, httplib::Response& res);
  void layer(const httplib::Request& req, httplib::Response& res);
  void recolor_session(const httplib::Request& req, httplib::Response& res);

  std::shared_ptr<const Session> require_session(const std::string& id) {
    auto session = store.find(id);
    if (!session) throw HttpError{404, "unknown session " + id};
    return session;
  }

  template <typename Handler>
  auto guarded(Handler handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        (this->*handler)(req, res);
      } catch (const HttpError& e) {
        send_error(res, e.status, e.message);
      } catch (const Error& e) {
        send_error(res, status_for(e), e.what());
      } catch (const std::bad_alloc&) {
        send_error(res, 413, "request too large to process");
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  }
};

void Service::Impl::install_routes() {
  // The decode cap is on pixels; this only bounds the raw upload.
  server.set_payload_max_length(256u * 1024u * 1024u);
  server.Post("/api/decompose", guarded(&Impl::decompose));
  server.Get(R"(/api/sessions/([0-9A-Za-z]+)/layers/(-?\d+))", guarded(&Impl::layer));
  server.Post(R"(/api/sessions/([0-9A-Za-z]+)/recolor)", guarded(&Impl::recolor_session));

  if (options.static_dir && std::filesystem::is_directory(*options.static_dir)) {
    server.set_mount_point("/", options.static_dir->string());
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
}

void Service::Impl::decompose(const httplib::Request& req, httplib::Response& res) {
  if (!req.is_multipart_form_data() || req.files.empty()) {
    throw HttpError{400, "expected multipart/form-data with an image file"};
  }
  const auto& file = req.has_file("image") ? req.get_file_value("image") : req.files.begin()->second;

  const int k = query_number<int>(req, "k", kDefaultLayers);
  const double lambda = query_number<double>(req, "lambda", kDefaultLambda);
  const auto seed = query_number<std::uint64_t>(req, "seed", 0);
  if (k < 1 || k > options.max_layers) {
    throw HttpError{400, "k must be in [1, " + std::to_string(options.max_layers) + "]"};
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw HttpError{400, "lambda must be a finite value >= 0"};

  const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(file.content.data()),
                                            file.content.size());
  const auto size = probe_image(bytes);
  if (size.width <= 0 || size.height <= 0) throw HttpError{400, "image has no pixels"};
  if (size.width > options.max_width || size.height > options.max_height) {
    throw HttpError{413, "image " + std::to_string(size.width) + "x" + std::to_string(size.height) +
                             " exceeds the " + std::to_string(options.max_width) + "x" +
                             std::to_string(options.max_height) + " cap"};
  }

  Session session;
  session.source = from_bitmap(decode_image(bytes));
  const auto palette = estimate_palette(session.source, k, seed);
  session.stack = ukiyo::decompose(session.source, palette, lambda);
  session.lambda = lambda;
  session.seed = seed;
  session.created = std::chrono::system_clock::now();
  session.id = new_session_id();
  const auto stored = store.insert(std::move(session));

  const nlohmann::json body = {{"session_id", stored->id},
                               {"palette", palette_json(stored->stack.palette)},
                               {"width", stored->stack.width},
                               {"height", stored->stack.height},
                               {"max_clip_error", stored->stack.max_clip_error()}};
  res.set_content(body.dump(), kJsonType);
}

void Service::Impl::layer(const httplib::Request& req, httplib::Response& res) {
  const auto session = require_session(req.matches[1].str());
  long long k = -1;
  try {
    k = std::stoll(req.matches[2].str());
  } catch (const std::exception&) {
    throw HttpError{404, "no such layer"};
  }
  if (k < 0 || static_cast<std::size_t>(k) >= session->stack.layers()) {
    throw HttpError{404, "layer " + req.matches[2].str() + " out of range"};
  }
  const auto png = encode_png(layer_bitmap(session->stack, static_cast<std::size_t>(k)));
  res.set_content(std::string(png.begin(), png.end()), kPngType);
}

void Service::Impl::recolor_session(const httplib::Request& req, httplib::Response& res) {
  const auto session = require_session(req.matches[1].str());
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw HttpError{400, std::string("invalid JSON body: ") + e.what()};
  }
  if (!body.is_object()) throw HttpError{400, "JSON body must be an object"};

  // Either {"colors": [[r,g,b],...]}, {"reference_session": id} or
  // {"colors": {"reference_session": id}}.
  const nlohmann::json* reference = nullptr;
  if (body.contains("reference_session")) {
    reference = &body["reference_session"];
  } else if (body.contains("colors") && body["colors"].is_object() && body["colors"].contains("reference_session")) {
    reference = &body["colors"]["reference_session"];
  }

  LayerStack recolored;
  if (reference) {
    if (!reference->is_string()) throw HttpError{400, "reference_session must be a string"};
    const auto ref = require_session(reference->get<std::string>());
    recolored = transfer_palette(session->stack, ref->source, ref->seed);
  } else {
    const auto colors = body.find("colors");
    if (colors == body.end() || !colors->is_array()) throw HttpError{400, "expected \"colors\": [[r,g,b], ...]"};
    std::vector<Rgb> list;
    for (const auto& c : *colors) {
      if (!c.is_array() || c.size() != 3 || !c[0].is_number() || !c[1].is_number() || !c[2].is_number()) {
        throw HttpError{400, "each color must be [r, g, b] numbers in [0,1]"};
      }
      list.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    }
    if (list.size() != session->stack.layers()) {
      throw HttpError{400, "expected " + std::to_string(session->stack.layers()) + " colors, got " +
                               std::to_string(list.size())};
    }
    recolored = recolor(session->stack, Palette(std::move(list)));
  }
  const auto png = encode_png(to_bitmap(compose(recolored)));
  res.set_content(std::string(png.begin(), png.end()), kPngType);
}

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) { impl_->install_routes(); }

Service::~Service() { stop(); }

int Service::bind() {
  if (impl_->options.port == 0) {
    const int port = impl_->server.bind_to_any_port(impl_->options.host);
    if (port < 0) throw Error(ErrorKind::Io, "cannot bind " + impl_->options.host);
    return port;
  }
  if (!impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
    throw Error(ErrorKind::Io, "cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  return impl_->options.port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

SessionStore& Service::sessions() noexcept { return impl_->store; }

}  // namespace ukiyo
