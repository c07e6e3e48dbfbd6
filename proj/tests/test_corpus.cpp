#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "paragen/corpus.hpp"

using namespace paragen;
using namespace paragen::corpus;

namespace {

namespace fs = std::filesystem;

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name) {
    path = fs::temp_directory_path() / ("paragen_test_" + name);
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
};

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return num / std::sqrt(na * nb);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("vocabulary reserves pad, bos and eos") {
  Vocabulary v;
  CHECK(v.size() == 3);
  CHECK(v.id("<pad>") == kPadId);
  CHECK(v.id("<bos>") == kBosId);
  CHECK(v.id("<eos>") == kEosId);
  CHECK(v.id("missing") == -1);
  const int id = v.add("word");
  CHECK(id == 3);
  CHECK(v.add("word") == 3);  // idempotent
  CHECK(v.token(3) == "word");
  CHECK_THROWS_AS(v.token(99), ContractViolation);
}

TEST_CASE("vocabulary save/load round trip") {
  Vocabulary v;
  v.add("alpha");
  v.add("beta");
  TempFile f("vocab.txt");
  v.save(f.path);
  auto loaded = Vocabulary::load(f.path);
  CHECK(loaded.size() == v.size());
  CHECK(loaded.id("alpha") == v.id("alpha"));
  CHECK(loaded.id("beta") == v.id("beta"));
}

TEST_CASE("vocabulary load rejects bad files") {
  TempFile f("vocab_bad.txt");
  {
    std::ofstream out(f.path);
    out << "<pad>\n<bos>\n<eos>\nx\nx\n";
  }
  CHECK_THROWS_AS(Vocabulary::load(f.path), ParseError);
  {
    std::ofstream out(f.path);
    out << "<pad>\nwrong\n<eos>\n";
  }
  CHECK_THROWS_AS(Vocabulary::load(f.path), ParseError);
  {
    std::ofstream out(f.path);
    out << "<pad>\n";
  }
  CHECK_THROWS_AS(Vocabulary::load(f.path), ParseError);
}

TEST_CASE("scene generation is deterministic and well-formed") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto a = generate_scene(seed);
    auto b = generate_scene(seed);
    CHECK(a.meta_concept == b.meta_concept);
    CHECK(a.objects == b.objects);
    CHECK(a.attributes == b.attributes);

    CHECK(a.meta_concept >= 0);
    CHECK(static_cast<std::size_t>(a.meta_concept) < meta_concept_count());
    CHECK(a.objects.size() >= 2);
    CHECK(a.objects.size() <= 4);
    CHECK(a.objects.size() == a.attributes.size());
    std::set<int> distinct(a.objects.begin(), a.objects.end());
    CHECK(distinct.size() == a.objects.size());
  }
}

TEST_CASE("scene generation covers every meta-concept") {
  std::set<int> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) seen.insert(generate_scene(seed).meta_concept);
  CHECK(seen.size() == meta_concept_count());
}

TEST_CASE("features are deterministic and cluster by meta-concept") {
  auto s = generate_scene(42);
  CHECK(scene_to_features(s, 16) == scene_to_features(s, 16));

  // two scenes sharing a meta-concept should be closer, on average, than two
  // scenes from different concepts
  std::vector<Scene> scenes;
  for (std::uint64_t seed = 0; seed < 120; ++seed) scenes.push_back(generate_scene(seed));
  double same = 0, diff = 0;
  int n_same = 0, n_diff = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    for (std::size_t j = i + 1; j < scenes.size(); ++j) {
      const double c =
          cosine(scene_to_features(scenes[i], 32), scene_to_features(scenes[j], 32));
      if (scenes[i].meta_concept == scenes[j].meta_concept) {
        same += c;
        ++n_same;
      } else {
        diff += c;
        ++n_diff;
      }
    }
  }
  CHECK(same / n_same > diff / n_diff + 0.1);
}

TEST_CASE("reference paragraphs follow the topic chain") {
  auto scene = generate_scene(7);
  auto para = scene_to_paragraph(scene, 0, std::nullopt);
  REQUIRE(para.size() == 3);
  // sentence 2 re-mentions the first object, sentence 3 the second
  const auto& obj0 = para[0][6];
  CHECK(para[1][1] == obj0);
  const auto& obj1 = para[1].back();
  CHECK(para[2][1] == obj1);
}

TEST_CASE("reference variants are mutually distinct from the first token") {
  auto scene = generate_scene(11);
  auto paras = scene_to_paragraphs(scene, reference_variant_count());
  for (std::size_t a = 0; a < paras.size(); ++a) {
    for (std::size_t b = a + 1; b < paras.size(); ++b) {
      CHECK(paras[a] != paras[b]);
      CHECK(paras[a][0][0] != paras[b][0][0]);
    }
  }
  CHECK_THROWS_AS(scene_to_paragraphs(scene, 0), ContractViolation);
  CHECK_THROWS_AS(scene_to_paragraphs(scene, reference_variant_count() + 1), ContractViolation);
}

TEST_CASE("star ratings use disjoint sentiment vocabularies") {
  auto scene = generate_scene(13);
  std::set<std::string> low_words, high_words;
  for (int variant = 0; variant < reference_variant_count(); ++variant) {
    low_words.insert(scene_to_paragraph(scene, variant, 1).back()[2]);
    high_words.insert(scene_to_paragraph(scene, variant, 5).back()[2]);
  }
  for (const auto& w : low_words) CHECK(high_words.count(w) == 0);
  auto with = scene_to_paragraph(scene, 0, 3);
  auto without = scene_to_paragraph(scene, 0, std::nullopt);
  CHECK(with.size() == without.size() + 1);
  CHECK_THROWS_AS(scene_to_paragraph(scene, 0, 6), ContractViolation);
}

TEST_CASE("every grammar word is in the grammar vocabulary") {
  const auto& vocab = grammar_vocabulary();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto scene = generate_scene(seed);
    for (int variant = 0; variant < reference_variant_count(); ++variant) {
      for (const auto& sent : scene_to_paragraph(scene, variant, 1 + seed % 5)) {
        for (const auto& w : sent) CHECK(vocab.contains(w));
      }
    }
  }
}

TEST_CASE("corpus paragraphs respect the sentence and word caps") {
  auto samples = make_corpus(50, 5, true, 123, 16);
  CHECK(samples.size() == 250);
  for (const auto& s : samples) {
    CHECK(s.sentences.size() >= 1);
    CHECK(s.sentences.size() <= 6);
    for (const auto& sent : s.sentences) {
      CHECK(sent.size() >= 1);
      CHECK(sent.size() <= 30);
      for (int id : sent) CHECK(id > kEosId);  // reserved ids never appear
    }
    CHECK(s.features.size() == 16);
    REQUIRE(s.stars.has_value());
    CHECK(*s.stars >= 1);
    CHECK(*s.stars <= 5);
  }
}

TEST_CASE("make_corpus is a pure function of the master seed") {
  auto a = make_corpus(20, 3, true, 777, 8);
  auto b = make_corpus(20, 3, true, 777, 8);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].features == b[i].features);
    CHECK(a[i].sentences == b[i].sentences);
    CHECK(a[i].stars == b[i].stars);
  }
  auto c = make_corpus(20, 3, true, 778, 8);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].sentences != c[i].sentences) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("dataset save/load round trip and byte determinism") {
  auto samples = make_corpus(10, 2, true, 55, 8);
  const auto& vocab = grammar_vocabulary();
  TempFile f1("data1.jsonl"), f2("data2.jsonl");
  save_dataset(f1.path, samples, vocab);
  save_dataset(f2.path, samples, vocab);
  CHECK(read_file(f1.path) == read_file(f2.path));

  auto loaded = load_dataset(f1.path, vocab);
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(loaded[i].features == samples[i].features);
    CHECK(loaded[i].sentences == samples[i].sentences);
    CHECK(loaded[i].stars == samples[i].stars);
  }
}

TEST_CASE("dataset loader reports the offending line") {
  const auto& vocab = grammar_vocabulary();
  TempFile f("data_bad.jsonl");

  auto expect_error = [&](const std::string& content, const std::string& needle) {
    {
      std::ofstream out(f.path);
      out << content;
    }
    try {
      load_dataset(f.path, vocab);
      FAIL("expected a ParseError for: ", needle);
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(needle) != std::string::npos);
    }
  };

  const std::string good = R"({"features": [0.1, 0.2], "sentences": [["car"]]})";
  expect_error(good + "\nnot json\n", "line 2");
  expect_error(good + "\n" + R"({"sentences": [["car"]]})" + "\n", "features");
  expect_error(good + "\n" + R"({"features": [0.1, 0.2]})" + "\n", "sentences");
  expect_error(good + "\n" + R"({"features": [0.1], "sentences": [["car"]]})" + "\n",
               "feature length mismatch");
  expect_error(good + "\n" + R"({"features": [0.1, 0.2], "sentences": [["zzz"]]})" + "\n",
               "out of vocabulary");
  expect_error(R"({"features": [0.1], "sentences": [], "stars": 3})" + std::string("\n"),
               "no sentences");
  expect_error(R"({"features": [0.1], "sentences": [["car"]], "stars": 9})" + std::string("\n"),
               "stars");
}
