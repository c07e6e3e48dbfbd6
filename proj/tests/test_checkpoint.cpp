#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "paragen/checkpoint.hpp"

using namespace paragen;

namespace {

namespace fs = std::filesystem;

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name) {
    path = fs::temp_directory_path() / ("paragen_ckpt_" + name);
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
};

Model tiny_model(std::uint64_t seed = 1, bool vae = false) {
  Hyper hp;
  hp.feat_dim = 5;
  hp.hidden = 3;
  hp.vocab = 8;
  hp.vae = vae;
  return Model::init(hp, seed);
}

std::map<std::string, std::vector<double>> param_values(const Model& m) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, p] : m.store.params()) out[name] = p->value;
  return out;
}

std::vector<corpus::ParagraphSample> tiny_data() {
  corpus::ParagraphSample a, b;
  a.features = {0.2, -0.4, 0.8, 0.1, -0.9};
  a.sentences = {{3, 4}, {6}};
  b.features = {-0.5, 0.3, 0.2, -0.8, 0.4};
  b.sentences = {{5, 7, 3}};
  return {a, b};
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  auto m = tiny_model(42, /*vae=*/true);
  // perturb values so they are not just the init distribution
  Rng rng(5);
  for (const auto& [name, p] : m.store.params()) {
    for (auto& v : p->value) v += rng.uniform(-0.5, 0.5);
  }
  AdamState adam;
  for (const auto& [name, p] : m.store.params()) {
    auto& [mm, vv] = adam.moments[name];
    mm.assign(p->size(), 0.125);
    vv.assign(p->size(), 0.25);
  }
  adam.t = 17;
  Rng train_rng(99);
  train_rng.uniform();  // advance so the state is nontrivial

  TempFile f("round_trip.bin");
  save_checkpoint(f.path, snapshot(m, &adam, 12, 42, &train_rng));
  auto c = load_checkpoint(f.path);
  CHECK(c.version == 1);
  CHECK(c.epoch == 12);
  CHECK(c.seed == 42);
  CHECK(c.hp == m.hp);

  auto restored = restore_model(c);
  CHECK(param_values(restored) == param_values(m));

  AdamState adam2;
  Rng rng2(0);
  restore_optimizer(c, adam2, rng2);
  CHECK(adam2.t == 17);
  CHECK(adam2.moments == adam.moments);
  CHECK(rng2.state() == train_rng.state());
  CHECK(rng2.uniform() == train_rng.uniform());
}

TEST_CASE("checkpoint without optimizer state") {
  auto m = tiny_model(3);
  TempFile f("no_opt.bin");
  save_checkpoint(f.path, snapshot(m, nullptr, 0, 3, nullptr));
  auto c = load_checkpoint(f.path);
  CHECK_FALSE(c.has_optimizer);
  auto restored = restore_model(c);
  CHECK(param_values(restored) == param_values(m));
  AdamState adam;
  Rng rng(0);
  CHECK_THROWS_AS(restore_optimizer(c, adam, rng), ContractViolation);
}

TEST_CASE("save is byte-deterministic") {
  auto m = tiny_model(7);
  auto c = snapshot(m, nullptr, 2, 7, nullptr);
  TempFile f1("det1.bin"), f2("det2.bin");
  save_checkpoint(f1.path, c);
  save_checkpoint(f2.path, c);
  std::ifstream a(f1.path, std::ios::binary), b(f2.path, std::ios::binary);
  std::string da((std::istreambuf_iterator<char>(a)), {});
  std::string db((std::istreambuf_iterator<char>(b)), {});
  CHECK(da == db);
  CHECK(!da.empty());
}

TEST_CASE("corruption and truncation are detected") {
  auto m = tiny_model(11);
  TempFile f("corrupt.bin");
  save_checkpoint(f.path, snapshot(m, nullptr, 1, 11, nullptr));

  auto bytes = [&] {
    std::ifstream in(f.path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();

  SUBCASE("flipped tensor byte") {
    auto bad = bytes;
    bad[bad.size() / 2] ^= 0x40;
    std::ofstream(f.path, std::ios::binary) << bad;
    CHECK_THROWS_WITH_AS(load_checkpoint(f.path), doctest::Contains("hash mismatch"),
                         ParseError);
  }
  SUBCASE("truncated file") {
    std::ofstream(f.path, std::ios::binary) << bytes.substr(0, bytes.size() - 9);
    CHECK_THROWS_AS(load_checkpoint(f.path), ParseError);
  }
  SUBCASE("trailing garbage") {
    // appended bytes shift the hash trailer, so this surfaces as corruption
    std::ofstream(f.path, std::ios::binary) << (bytes + "extra");
    CHECK_THROWS_AS(load_checkpoint(f.path), ParseError);
  }
  SUBCASE("wrong magic") {
    auto bad = bytes;
    bad[0] = 'X';
    std::ofstream(f.path, std::ios::binary) << bad;
    CHECK_THROWS_WITH_AS(load_checkpoint(f.path), doctest::Contains("not a checkpoint"),
                         ParseError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.bin"), ParseError); }
}

TEST_CASE("restore rejects a tampered tensor set") {
  auto m = tiny_model(13);
  auto c = snapshot(m, nullptr, 0, 13, nullptr);
  SUBCASE("missing tensor") {
    c.tensors.erase(c.tensors.begin());
    CHECK_THROWS_AS(restore_model(c), ParseError);
  }
  SUBCASE("wrong shape") {
    c.tensors.begin()->second.first = {1, 1};
    c.tensors.begin()->second.second = {0.0};
    CHECK_THROWS_AS(restore_model(c), ParseError);
  }
  SUBCASE("unknown version") {
    c.version = 999;
    TempFile f("ver.bin");
    save_checkpoint(f.path, c);
    CHECK_THROWS_WITH_AS(load_checkpoint(f.path), doctest::Contains("version"), ParseError);
  }
}

TEST_CASE("resume-equivalence: split training matches an uninterrupted run") {
  auto data = tiny_data();
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.seed = 123;
  cfg.base_lr = 1e-3;

  // uninterrupted
  auto m_full = tiny_model(9);
  AdamState adam_full;
  train(m_full, data, cfg, &adam_full);

  // 3 epochs, checkpoint, restore, 3 more
  auto m_half = tiny_model(9);
  AdamState adam_half;
  TempFile f("resume.bin");
  {
    TrainConfig first = cfg;
    first.epochs = 3;
    Rng rng_out(0);
    train(m_half, data, first, &adam_half, nullptr, 0,
          [&](const EpochStats& s, Model& mm, const AdamState& st, const Rng& r) {
            if (s.epoch == 3) save_checkpoint(f.path, snapshot(mm, &st, 3, cfg.seed, &r));
          });
  }
  auto c = load_checkpoint(f.path);
  auto m_resumed = restore_model(c);
  AdamState adam_resumed;
  Rng rng_resumed(0);
  restore_optimizer(c, adam_resumed, rng_resumed);
  train(m_resumed, data, cfg, &adam_resumed, &rng_resumed, c.epoch);

  CHECK(param_values(m_resumed) == param_values(m_full));
  CHECK(adam_resumed.t == adam_full.t);
  CHECK(adam_resumed.moments == adam_full.moments);
}
