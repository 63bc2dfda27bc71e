#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mrsim {

using NodeId = int;
using RackId = int;
using BlockId = int;
using JobId = int;
using TaskId = int;
using AttemptId = int;
using UserId = int;

inline constexpr int kInvalidId = -1;

// Scenario/config problems: bad topology, bad workload ranges, misconfigured
// scheduler parameters. CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Internal consistency violations while a simulation is running or while a
// finished log is post-processed: missing block, clock regression, scheduler
// deadlock. CLI maps these to exit code 3.
class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mrsim
