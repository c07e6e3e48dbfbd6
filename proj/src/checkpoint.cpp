#include "paragen/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "paragen/serde.hpp"

namespace paragen {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'P', 'G', 'C', '1'};

void put_u64(std::string& buf, std::uint64_t v) {
  char raw[8];
  std::memcpy(raw, &v, 8);
  buf.append(raw, 8);
}

void put_doubles(std::string& buf, const std::vector<double>& v) {
  buf.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

class Reader {
public:
  Reader(const std::string& buf) : buf_(buf) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, buf_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string out = buf_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::vector<double> doubles(std::size_t count) {
    need(count * sizeof(double));
    std::vector<double> out(count);
    std::memcpy(out.data(), buf_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
    return out;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return buf_.size() - pos_; }

private:
  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) throw ParseError("checkpoint truncated");
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  json header;
  header["version"] = c.version;
  header["hyper"] = c.hp;
  header["epoch"] = c.epoch;
  header["seed"] = c.seed;
  header["rng_state"] = c.rng_state;
  header["optimizer"] = json{{"present", c.has_optimizer}, {"t", c.adam_t}};
  json tensors = json::array();
  for (const auto& [name, entry] : c.tensors) {
    tensors.push_back(json{{"name", name}, {"shape", entry.first}});
  }
  header["tensors"] = std::move(tensors);

  std::string buf(kMagic, 4);
  const std::string header_str = header.dump();
  put_u64(buf, header_str.size());
  buf += header_str;
  for (const auto& [name, entry] : c.tensors) put_doubles(buf, entry.second);
  if (c.has_optimizer) {
    for (const auto& [name, entry] : c.tensors) {
      auto it = c.adam_moments.find(name);
      if (it == c.adam_moments.end()) {
        throw ContractViolation("checkpoint: optimizer moments missing for " + name);
      }
      put_doubles(buf, it->second.first);
      put_doubles(buf, it->second.second);
    }
  }
  put_u64(buf, fnv1a64(reinterpret_cast<const unsigned char*>(buf.data()), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write checkpoint: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ParseError("short write to checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read checkpoint: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw ParseError("not a checkpoint file: " + path.string());
  }
  const std::size_t payload_len = buf.size() - 8;
  std::uint64_t stored_hash;
  std::memcpy(&stored_hash, buf.data() + payload_len, 8);
  const std::uint64_t computed =
      fnv1a64(reinterpret_cast<const unsigned char*>(buf.data()), payload_len);
  if (stored_hash != computed) throw ParseError("checkpoint corrupted (hash mismatch)");

  Reader r(buf);
  r.bytes(4);  // magic
  const std::uint64_t header_len = r.u64();
  json header = json::parse(r.bytes(header_len), nullptr, false);
  if (header.is_discarded()) throw ParseError("checkpoint header is not valid JSON");

  Checkpoint c;
  c.version = header.at("version").get<std::uint32_t>();
  if (c.version != 1) {
    throw ParseError("unsupported checkpoint version " + std::to_string(c.version));
  }
  c.hp = header.at("hyper").get<Hyper>();
  c.epoch = header.at("epoch").get<int>();
  c.seed = header.at("seed").get<std::uint64_t>();
  c.rng_state = header.at("rng_state").get<std::string>();
  c.has_optimizer = header.at("optimizer").at("present").get<bool>();
  c.adam_t = header.at("optimizer").at("t").get<std::int64_t>();

  std::vector<std::pair<std::string, std::vector<std::size_t>>> order;
  for (const auto& t : header.at("tensors")) {
    order.emplace_back(t.at("name").get<std::string>(),
                       t.at("shape").get<std::vector<std::size_t>>());
  }
  for (const auto& [name, shape] : order) {
    c.tensors[name] = {shape, r.doubles(ad::shape_count(shape))};
  }
  if (c.has_optimizer) {
    for (const auto& [name, shape] : order) {
      const std::size_t n = ad::shape_count(shape);
      auto m = r.doubles(n);
      auto v = r.doubles(n);
      c.adam_moments[name] = {std::move(m), std::move(v)};
    }
  }
  if (r.remaining() != 8) throw ParseError("checkpoint has trailing bytes");
  return c;
}

Checkpoint snapshot(const Model& m, const AdamState* adam, int epoch, std::uint64_t seed,
                    const Rng* rng) {
  Checkpoint c;
  c.hp = m.hp;
  c.epoch = epoch;
  c.seed = seed;
  if (rng) c.rng_state = rng->state();
  for (const auto& [name, p] : m.store.params()) {
    c.tensors[name] = {p->shape, p->value};
  }
  if (adam) {
    c.has_optimizer = true;
    c.adam_t = adam->t;
    for (const auto& [name, p] : m.store.params()) {
      auto it = adam->moments.find(name);
      if (it != adam->moments.end() && it->second.first.size() == p->size()) {
        c.adam_moments[name] = it->second;
      } else {
        c.adam_moments[name] = {std::vector<double>(p->size(), 0.0),
                                std::vector<double>(p->size(), 0.0)};
      }
    }
  }
  return c;
}

Model restore_model(const Checkpoint& c) {
  Model m = Model::init(c.hp, c.seed);
  const auto& params = m.store.params();
  if (params.size() != c.tensors.size()) {
    throw ParseError("checkpoint parameter set does not match hyperparameters");
  }
  for (const auto& [name, p] : params) {
    auto it = c.tensors.find(name);
    if (it == c.tensors.end()) throw ParseError("checkpoint missing tensor " + name);
    if (it->second.first != p->shape) {
      throw ParseError("checkpoint tensor " + name + " has wrong shape");
    }
    p->value = it->second.second;
  }
  return m;
}

void restore_optimizer(const Checkpoint& c, AdamState& adam, Rng& rng) {
  if (!c.has_optimizer) throw ContractViolation("checkpoint carries no optimizer state");
  adam.t = c.adam_t;
  adam.moments = c.adam_moments;
  rng.set_state(c.rng_state);
}

}  // namespace paragen
