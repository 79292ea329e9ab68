#pragma once

#include <string>
#include <vector>

#include "planarm/nn/net.hpp"
#include "planarm/sim/types.hpp"

namespace planarm::io {

// Versioned binary checkpoint: header (magic, version, phase tag, config
// digest, dependency digest), then named little-endian f32 arrays (model
// parameters and optimizer state). The payload digest binds dependent loads:
// an adapter checkpoint records the digest of the phase-1 payload it was
// trained against.
struct Checkpoint {
  std::string phase;            // "phase1", "phase2", "baseline:<v>"
  std::string config_digest;
  std::string teacher_digest;   // phase2: digest of the frozen phase-1 payload
  int64_t step_count = 0;       // optimizer step counter
  std::vector<nn::Blob<float>> arrays;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  // Digest of the serialized arrays (names, shapes, raw values).
  std::string payload_digest() const;

  const nn::Blob<float>* find(const std::string& name) const;
  // Copies stored arrays into live blobs by name; faults on any missing name
  // or shape mismatch.
  void restore_into(const std::vector<nn::Blob<float>*>& blobs) const;
  static Checkpoint capture(const std::string& phase,
                            const std::string& config_digest,
                            const std::vector<nn::Blob<float>*>& blobs);
};

}  // namespace planarm::io
