// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tdlchan {

/// Thrown by the scene tracer when no propagation path reaches the receiver.
class empty_channel_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an iterative solver produces a non-finite state.
class divergence_error : public std::runtime_error {
  public:
    divergence_error(const std::string &what, long step)
        : std::runtime_error(what), step_(step) {}

    /// Iteration (epoch or sample index) at which the divergence was detected.
    long step() const noexcept { return step_; }

  private:
    long step_;
};

/// Thrown when a direct solve meets a (numerically) rank-deficient system.
class singularity_error : public std::runtime_error {
  public:
    singularity_error(const std::string &what, double condition)
        : std::runtime_error(what), condition_(condition) {}

    double condition_estimate() const noexcept { return condition_; }

  private:
    double condition_;
};

} // namespace tdlchan
