#pragma once

#include <functional>
#include <memory>
#include <string>

#include "webrl/core/error.hpp"
#include "webrl/core/types.hpp"

namespace webrl::core {

class EnvError : public Error {
 public:
  using Error::Error;
};

// Environment contract shared by the simulated site and the live-browser
// driver. One instance serves one episode at a time; action dispatch failures
// are reported through ExecStatus, infrastructure faults throw EnvError.
class Environment {
 public:
  virtual ~Environment() = default;

  // Navigates to the episode's start URL and returns the initial observation.
  virtual Observation reset(const std::string& start_url) = 0;

  // Dispatches one action. Wait and Answer are no-ops at this layer.
  virtual ExecStatus execute(const Action& action) = 0;

  // Captures the current page state.
  virtual Observation observe() = 0;

  virtual int viewport_width() const = 0;
  virtual int viewport_height() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

}  // namespace webrl::core
