#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "planarm/sim/types.hpp"

namespace planarm::io {

// Append-only line-delimited metrics stream; the first record carries the
// config digest that stamps every artifact of the run.
class MetricsWriter {
 public:
  MetricsWriter() = default;
  MetricsWriter(const std::string& path, const std::string& config_digest,
                const std::string& kind) {
    open(path, config_digest, kind);
  }

  void open(const std::string& path, const std::string& config_digest,
            const std::string& kind) {
    out_.open(path);
    if (!out_) throw Fault("metrics: cannot write " + path);
    nlohmann::json meta{{"record", "meta"},
                        {"kind", kind},
                        {"config_digest", config_digest}};
    out_ << meta.dump() << "\n";
    out_.flush();
  }

  void row(const nlohmann::json& j) {
    if (!out_.is_open()) return;
    out_ << j.dump() << "\n";
    out_.flush();
  }

  bool is_open() const { return out_.is_open(); }

 private:
  std::ofstream out_;
};

}  // namespace planarm::io
