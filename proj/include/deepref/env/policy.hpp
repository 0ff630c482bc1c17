#pragma once

#include <string>

#include "deepref/env/observation.hpp"
#include "deepref/env/prefetch_env.hpp"

namespace deepref::env {

// A prefetcher: one decision per user request. Implementations may keep
// per-episode state; one instance drives one environment.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;

  // Adjusts the environment for policies that need special semantics (the
  // clairvoyant oracle).
  virtual void configure(EnvConfig& /*config*/) const {}

  // Called after env.reset(), before the first act().
  virtual void begin_episode(const PrefetchEnv& /*env*/) {}

  virtual Action act(const PrefetchEnv& env, const Observation& observation) = 0;

  // Learned policies explore only when enabled; evaluation disables it.
  virtual void set_explore(bool /*explore*/) {}
};

}  // namespace deepref::env
