#include "planarm/io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "planarm/io/config.hpp"

namespace planarm::io {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'L', 'N', 'A', 'R', 'M', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
  buf.append(reinterpret_cast<const char*>(&v), 4);
}
void put_u64(std::string& buf, uint64_t v) {
  buf.append(reinterpret_cast<const char*>(&v), 8);
}
void put_str(std::string& buf, const std::string& s) {
  put_u32(buf, static_cast<uint32_t>(s.size()));
  buf.append(s);
}

struct Reader {
  const char* p;
  const char* end;
  explicit Reader(const std::string& s) : p(s.data()), end(s.data() + s.size()) {}
  void need(size_t n) const {
    if (p + n > end) throw Fault("checkpoint: truncated file");
  }
  uint32_t u32() {
    need(4);
    uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s(p, n);
    p += n;
    return s;
  }
};

std::string serialize_arrays(const std::vector<nn::Blob<float>>& arrays) {
  std::string buf;
  put_u32(buf, static_cast<uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    put_str(buf, a.name);
    put_u32(buf, static_cast<uint32_t>(a.shape.size()));
    for (int d : a.shape) put_u32(buf, static_cast<uint32_t>(d));
    put_u64(buf, a.val.size());
    buf.append(reinterpret_cast<const char*>(a.val.data()),
               a.val.size() * sizeof(float));
  }
  return buf;
}

}  // namespace

std::string Checkpoint::payload_digest() const {
  const std::string payload = serialize_arrays(arrays);
  return to_hex(fnv1a64(payload.data(), payload.size()));
}

void Checkpoint::save(const std::string& path) const {
  const std::string payload = serialize_arrays(arrays);
  const std::string digest = to_hex(fnv1a64(payload.data(), payload.size()));
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put_u32(buf, kVersion);
  put_str(buf, phase);
  put_str(buf, config_digest);
  put_str(buf, teacher_digest);
  put_str(buf, digest);
  put_u64(buf, static_cast<uint64_t>(step_count));
  buf += payload;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Fault("checkpoint: cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Fault("checkpoint: cannot read " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  Reader r(buf);
  r.need(sizeof(kMagic));
  if (std::memcmp(r.p, kMagic, sizeof(kMagic)) != 0)
    throw Fault("checkpoint: bad magic in " + path);
  r.p += sizeof(kMagic);
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw Fault("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ck;
  ck.phase = r.str();
  ck.config_digest = r.str();
  ck.teacher_digest = r.str();
  const std::string stored_digest = r.str();
  ck.step_count = static_cast<int64_t>(r.u64());
  const std::string payload(r.p, r.end);
  if (to_hex(fnv1a64(payload.data(), payload.size())) != stored_digest)
    throw Fault("checkpoint: payload digest mismatch (corrupt or tampered): " +
                path);
  const uint32_t count = r.u32();
  ck.arrays.resize(count);
  for (uint32_t i = 0; i < count; ++i) {
    nn::Blob<float>& a = ck.arrays[i];
    a.name = r.str();
    const uint32_t nd = r.u32();
    a.shape.resize(nd);
    size_t numel = 1;
    for (uint32_t d = 0; d < nd; ++d) {
      a.shape[d] = static_cast<int>(r.u32());
      numel *= static_cast<size_t>(a.shape[d]);
    }
    const uint64_t n = r.u64();
    if (n != numel) throw Fault("checkpoint: shape/size mismatch for " + a.name);
    r.need(n * sizeof(float));
    a.val.resize(n);
    std::memcpy(a.val.data(), r.p, n * sizeof(float));
    r.p += n * sizeof(float);
  }
  return ck;
}

const nn::Blob<float>* Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

void Checkpoint::restore_into(const std::vector<nn::Blob<float>*>& blobs) const {
  for (nn::Blob<float>* b : blobs) {
    const nn::Blob<float>* src = find(b->name);
    if (!src) throw Fault("checkpoint: missing array " + b->name);
    if (src->shape != b->shape || src->val.size() != b->val.size())
      throw Fault("checkpoint: shape mismatch for " + b->name);
    b->val = src->val;
  }
}

Checkpoint Checkpoint::capture(const std::string& phase,
                               const std::string& config_digest,
                               const std::vector<nn::Blob<float>*>& blobs) {
  Checkpoint ck;
  ck.phase = phase;
  ck.config_digest = config_digest;
  for (const nn::Blob<float>* b : blobs) ck.arrays.push_back(*b);
  return ck;
}

}  // namespace planarm::io
