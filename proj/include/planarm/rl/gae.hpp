#pragma once

#include <cstdint>
#include <vector>

#include "planarm/sim/types.hpp"

namespace planarm::rl {

// Generalized advantage estimation over one trajectory:
//   delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
//   A_t     = delta_t + gamma * lam * (1 - done_t) * A_{t+1}
// `v_tail` is V_T for bootstrapping the final step when it is not terminal.
inline std::vector<float> gae(const std::vector<float>& rewards,
                              const std::vector<float>& values,
                              const std::vector<uint8_t>& dones, float v_tail,
                              double gamma, double lam) {
  const size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw Fault("gae: mismatched trajectory arrays");
  std::vector<float> adv(n, 0.0f);
  double running = 0.0;
  for (size_t i = n; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double v_next = i + 1 < n ? values[i + 1] : v_tail;
    const double delta = rewards[i] + gamma * v_next * not_done - values[i];
    running = delta + gamma * lam * not_done * running;
    adv[i] = static_cast<float>(running);
    if (!std::isfinite(running)) throw Fault("gae: non-finite advantage");
  }
  return adv;
}

}  // namespace planarm::rl
