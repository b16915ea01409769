// SPDX-License-Identifier: Apache-2.0
#include "ann/runtime.hpp"

#include <chrono>
#include <cstdlib>

namespace ann {

std::int64_t SystemClock::now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Engine Engine::create(const EngineConfig& config) {
  Engine engine;
  engine.config = config;

  std::shared_ptr<llm::Backend> backend;
  if (config.backend == "scripted") {
    engine.scripted = config.script_path.empty()
                          ? std::make_shared<llm::ScriptedBackend>()
                          : llm::ScriptedBackend::from_file(config.script_path);
    backend = engine.scripted;
    engine.clock = std::make_shared<LogicalClock>();
  } else {
    llm::LiveConfig live = config.live;
    if (live.api_key.empty() && !config.api_key_env.empty()) {
      if (const char* key = std::getenv(config.api_key_env.c_str())) {
        live.api_key = key;
      }
    }
    backend = std::make_shared<llm::LiveBackend>(live);
    engine.clock = std::make_shared<SystemClock>();
  }

  auto meter = std::make_shared<llm::UsageMeter>();
  for (const auto& [model, price] : config.prices) meter->set_price(model, price);
  engine.gateway = std::make_shared<llm::Gateway>(backend, config.retry,
                                                  config.parallelism, meter);
  return engine;
}

}  // namespace ann
