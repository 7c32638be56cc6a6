// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "ukiyo/color_separation.hpp"
#include "ukiyo/image.hpp"

namespace ukiyo {

/// One decomposed upload. Immutable once stored; recolors never touch it.
struct Session {
  std::string id;
  RgbImage source;
  LayerStack stack;
  double lambda = kDefaultLambda;
  std::uint64_t seed = 0;
  std::chrono::system_clock::time_point created;
};

/// 128 random bits from the OS entropy source, as 32 lowercase hex digits.
std::string new_session_id();

/// Thread-safe in-memory session map with least-recently-used eviction.
class SessionStore {
 public:
  explicit SessionStore(std::size_t capacity = 16);

  /// Inserts and returns the stored id; evicts the least recently used
  /// session when full.
  std::shared_ptr<const Session> insert(Session session);
  /// Marks the session as most recently used.
  std::shared_ptr<const Session> find(const std::string& id);
  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  using Order = std::list<std::string>;
  struct Entry {
    std::shared_ptr<const Session> session;
    Order::iterator position;
  };

  std::size_t capacity_;
  mutable std::mutex mutex_;
  Order order_;  // front = most recent
  std::unordered_map<std::string, Entry> entries_;
};

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8777;  // 0 picks a free port
  std::size_t max_sessions = 16;
  int max_width = 4096;
  int max_height = 4096;
  int max_layers = 32;
  std::optional<std::filesystem::path> static_dir;  // workbench bundle served at "/"
};

/// Local HTTP API for the recolor workbench:
///   POST /api/decompose                     multipart "image"; query k, lambda, seed
///   GET  /api/sessions/{id}/layers/{k}      straight-alpha RGBA PNG
///   POST /api/sessions/{id}/recolor         {"colors": [[r,g,b],...]} or {"reference_session": id}
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket and returns the bound port.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  void stop();

  SessionStore& sessions() noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ukiyo
