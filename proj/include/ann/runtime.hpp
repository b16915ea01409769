// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "ann/config.hpp"
#include "ann/gateway.hpp"

namespace ann {

/// Timestamp source. The scripted backend pairs with a logical clock so
/// persisted artifacts are byte-identical across replays.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() override;
};

class LogicalClock final : public Clock {
 public:
  std::int64_t now_ms() override { return next_++; }

 private:
  std::atomic<std::int64_t> next_{0};
};

/// Shared runtime for one engine instance: configuration, the gateway all
/// model calls go through, and the timestamp source. Immutable after
/// creation; safe to share across concurrently executing tasks.
struct Engine {
  EngineConfig config;
  std::shared_ptr<llm::Gateway> gateway;
  std::shared_ptr<Clock> clock;
  // Set iff config.backend == "scripted"; lets callers add rules and read
  // the request log.
  std::shared_ptr<llm::ScriptedBackend> scripted;

  static Engine create(const EngineConfig& config);
};

}  // namespace ann
