#ifndef CERTLOOP_DEADLINE_HPP
#define CERTLOOP_DEADLINE_HPP

#include <chrono>
#include <optional>

namespace certloop {

/// Cooperative wall-clock budget.  Solvers poll `expired()` between work
/// blocks; nothing is preempted.  A logical-clock deadline never expires once
/// granted a positive budget, which keeps logical-mode runs deterministic
/// while preserving the "zero budget fails immediately" contract.
class Deadline {
 public:
  static Deadline unlimited() { return Deadline{}; }

  static Deadline after(double seconds) {
    Deadline d;
    if (seconds <= 0.0) {
      d.already_expired_ = true;
    } else {
      d.at_ = std::chrono::steady_clock::now() +
              std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(seconds));
    }
    return d;
  }

  static Deadline logical(double seconds) {
    Deadline d;
    d.already_expired_ = seconds <= 0.0;
    return d;
  }

  bool expired() const {
    if (already_expired_) return true;
    if (!at_) return false;
    return std::chrono::steady_clock::now() >= *at_;
  }

  /// Seconds left; infinity when unbounded.
  double remaining_seconds() const {
    if (already_expired_) return 0.0;
    if (!at_) return std::numeric_limits<double>::infinity();
    std::chrono::duration<double> left = *at_ - std::chrono::steady_clock::now();
    return left.count() > 0.0 ? left.count() : 0.0;
  }

 private:
  std::optional<std::chrono::steady_clock::time_point> at_;
  bool already_expired_ = false;
};

/// Sleeps up to `seconds` in short slices, stopping early when the deadline
/// expires.  Returns true when the full duration elapsed.  Used to inject
/// verification latency in failsafe experiments.
bool cooperative_sleep(double seconds, const Deadline& deadline);

}  // namespace certloop

#endif
