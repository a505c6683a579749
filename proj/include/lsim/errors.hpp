#pragma once

#include <stdexcept>
#include <string>

namespace lsim {

/// Invalid experiment, topology, fault, or network configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shape does not match what an operation requires.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A replica violated the rendezvous/voting protocol (duplicate output,
/// mismatched output shapes). Signals replica misbehaviour, not a harness bug.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fatal discrete-event simulation error (e.g. scheduling into the past).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// PTP timestamps that imply a negative path delay.
class InconsistentExchangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lsim
