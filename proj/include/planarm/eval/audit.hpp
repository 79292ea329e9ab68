#pragma once

#include <atomic>
#include <cstdint>

namespace planarm::eval {

// Privileged-access audit. While a scope is active, every assembly of
// privileged inputs (EnvParams fields, object rotation, finger contacts)
// bumps the counter. Deployable agents must leave it at zero.
class PrivilegedAudit {
 public:
  static void note_read() {
    if (active_.load(std::memory_order_relaxed))
      reads_.fetch_add(1, std::memory_order_relaxed);
  }
  static int64_t reads() { return reads_.load(); }

  struct Scope {
    Scope() {
      reads_.store(0);
      active_.store(true);
    }
    ~Scope() { active_.store(false); }
  };

 private:
  static inline std::atomic<bool> active_{false};
  static inline std::atomic<int64_t> reads_{0};
};

}  // namespace planarm::eval
