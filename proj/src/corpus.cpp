#include "paragen/corpus.hpp"

#include <array>
#include <fstream>

#include <json.hpp>

namespace paragen::corpus {

namespace {

using nlohmann::json;

constexpr std::size_t kConcepts = 5;
constexpr std::size_t kObjectsPerConcept = 4;
constexpr std::size_t kAttrsPerConcept = 4;
constexpr int kVariants = 5;

const std::array<std::string, kConcepts> kConceptNames = {"city", "office", "park", "harbor",
                                                          "kitchen"};

const std::array<std::array<std::string, kObjectsPerConcept>, kConcepts> kObjects = {{
    {"car", "street", "tower", "bus"},
    {"desk", "printer", "chair", "monitor"},
    {"tree", "bench", "fountain", "lawn"},
    {"boat", "pier", "crane", "gull"},
    {"stove", "kettle", "table", "shelf"},
}};

const std::array<std::array<std::string, kAttrsPerConcept>, kConcepts> kAttrs = {{
    {"busy", "gray", "tall", "crowded"},
    {"tidy", "modern", "wooden", "bright"},
    {"green", "quiet", "shady", "open"},
    {"blue", "salty", "rusty", "windy"},
    {"warm", "clean", "steamy", "small"},
}};

// register words, one column per variant
const std::array<std::string, kVariants> kOpeners = {"the", "a", "this", "that", "one"};
const std::array<std::string, kVariants> kVerb1 = {"shows", "holds", "frames", "features",
                                                  "reveals"};
const std::array<std::string, kVariants> kVerb2 = {"sits", "stands", "rests", "waits", "leans"};
const std::array<std::string, kVariants> kVerb3 = {"looks", "seems", "appears", "feels",
                                                  "stays"};
const std::array<std::string, kVariants> kLinkers = {"near", "beside", "behind", "around",
                                                     "before"};

const std::array<std::array<std::string, 2>, 5> kSentiments = {{
    {"terrible", "awful"},
    {"poor", "weak"},
    {"okay", "plain"},
    {"good", "solid"},
    {"great", "superb"},
}};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<bos>");
  add("<eos>");
}

int Vocabulary::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ContractViolation("vocabulary: token id out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write vocabulary file: " + path.string());
  for (const auto& t : tokens_) out << t << "\n";
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read vocabulary file: " + path.string());
  Vocabulary v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    if (lineno < 3) {
      const char* expect = lineno == 0 ? "<pad>" : lineno == 1 ? "<bos>" : "<eos>";
      if (line != expect) {
        throw ParseError("vocabulary line " + std::to_string(lineno) + ": expected reserved token " +
                         expect);
      }
    } else {
      if (line.empty()) throw ParseError("vocabulary line " + std::to_string(lineno) + ": empty token");
      if (v.contains(line)) {
        throw ParseError("vocabulary line " + std::to_string(lineno) + ": duplicate token " + line);
      }
      v.add(line);
    }
    ++lineno;
  }
  if (lineno < 3) throw ParseError("vocabulary file too short, reserved tokens missing");
  return v;
}

const Vocabulary& grammar_vocabulary() {
  static const Vocabulary vocab = [] {
    Vocabulary v;
    for (const auto& w : {"scene", "and", "overall", "a"}) v.add(w);
    for (const auto& w : kOpeners) v.add(w);
    for (const auto& w : kVerb1) v.add(w);
    for (const auto& w : kVerb2) v.add(w);
    for (const auto& w : kVerb3) v.add(w);
    for (const auto& w : kLinkers) v.add(w);
    for (std::size_t c = 0; c < kConcepts; ++c) {
      v.add(kConceptNames[c]);
      for (const auto& w : kObjects[c]) v.add(w);
      for (const auto& w : kAttrs[c]) v.add(w);
    }
    for (const auto& pair : kSentiments) {
      v.add(pair[0]);
      v.add(pair[1]);
    }
    return v;
  }();
  return vocab;
}

std::size_t meta_concept_count() { return kConcepts; }

const std::string& meta_concept_name(int mc) {
  if (mc < 0 || static_cast<std::size_t>(mc) >= kConcepts) {
    throw ContractViolation("meta-concept id out of range");
  }
  return kConceptNames[static_cast<std::size_t>(mc)];
}

Scene generate_scene(std::uint64_t seed) {
  Rng rng(seed);
  Scene s;
  s.seed = seed;
  s.meta_concept = static_cast<int>(rng.below(kConcepts));
  const std::size_t n_obj = 2 + rng.below(3);  // 2..4
  std::array<int, kObjectsPerConcept> ids = {0, 1, 2, 3};
  for (std::size_t i = kObjectsPerConcept - 1; i > 0; --i) {
    std::swap(ids[i], ids[rng.below(i + 1)]);
  }
  for (std::size_t i = 0; i < n_obj; ++i) {
    s.objects.push_back(ids[i]);
    s.attributes.push_back(static_cast<int>(rng.below(kAttrsPerConcept)));
  }
  return s;
}

std::vector<double> scene_to_features(const Scene& scene, std::size_t feat_dim) {
  std::vector<double> out(feat_dim, 0.0);
  auto accumulate = [&](std::uint64_t key) {
    Rng e(splitmix64(0x5EEDBA5Eull ^ key));
    for (auto& v : out) v += e.normal();
  };
  accumulate(1000 + static_cast<std::uint64_t>(scene.meta_concept));
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    accumulate(2000 + static_cast<std::uint64_t>(scene.meta_concept) * kObjectsPerConcept +
               static_cast<std::uint64_t>(scene.objects[i]));
    accumulate(3000 + static_cast<std::uint64_t>(scene.meta_concept) * kAttrsPerConcept +
               static_cast<std::uint64_t>(scene.attributes[i]));
  }
  Rng noise(splitmix64(scene.seed ^ 0xF0F0F0F0ull));
  for (auto& v : out) v += 0.1 * noise.normal();
  return out;
}

int reference_variant_count() { return kVariants; }

std::vector<std::vector<std::string>> scene_to_paragraph(const Scene& scene, int variant,
                                                         std::optional<int> stars) {
  if (variant < 0 || variant >= kVariants) throw ContractViolation("variant out of range");
  if (scene.objects.size() < 2) throw ContractViolation("scene needs at least two objects");
  if (stars && (*stars < 1 || *stars > 5)) throw ContractViolation("stars must be in 1..5");
  const auto c = static_cast<std::size_t>(scene.meta_concept);
  const auto r = static_cast<std::size_t>(variant);
  const auto& mc = kConceptNames[c];
  auto obj = [&](std::size_t i) { return kObjects[c][static_cast<std::size_t>(scene.objects[i])]; };
  auto attr = [&](std::size_t i) {
    return kAttrs[c][static_cast<std::size_t>(scene.attributes[i])];
  };

  std::vector<std::vector<std::string>> para;
  // S1: <opener> <mc> scene <verb1> a <attr0> <obj0> [and <obj2> [and <obj3>]]
  std::vector<std::string> s1 = {kOpeners[r], mc, "scene", kVerb1[r], "a", attr(0), obj(0)};
  for (std::size_t i = 2; i < scene.objects.size(); ++i) {
    s1.push_back("and");
    s1.push_back(obj(i));
  }
  para.push_back(std::move(s1));
  // S2 re-mentions obj0, introduces obj1 (topic chain)
  para.push_back({kOpeners[r], obj(0), kVerb2[r], kLinkers[r], "a", attr(1), obj(1)});
  // S3 re-mentions obj1
  para.push_back({kOpeners[r], obj(1), kVerb3[r], attr(0)});
  if (stars) {
    const auto& set = kSentiments[static_cast<std::size_t>(*stars - 1)];
    para.push_back({"overall", "a", set[r % 2], obj(0)});
  }
  return para;
}

std::vector<std::vector<std::vector<std::string>>> scene_to_paragraphs(
    const Scene& scene, int k, std::optional<int> stars) {
  if (k < 1 || k > kVariants) {
    throw ContractViolation("reference count must be in 1.." + std::to_string(kVariants));
  }
  std::vector<std::vector<std::vector<std::string>>> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int variant = 0; variant < k; ++variant) {
    out.push_back(scene_to_paragraph(scene, variant, stars));
  }
  return out;
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<ParagraphSample>& samples, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write dataset file: " + path.string());
  for (const auto& s : samples) {
    json j;
    j["features"] = s.features;
    json sents = json::array();
    for (const auto& sent : s.sentences) {
      json words = json::array();
      for (int id : sent) words.push_back(vocab.token(id));
      sents.push_back(std::move(words));
    }
    j["sentences"] = std::move(sents);
    if (s.stars) j["stars"] = *s.stars;
    out << j.dump() << "\n";
  }
}

std::vector<ParagraphSample> load_dataset(const std::filesystem::path& path,
                                          const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read dataset file: " + path.string());
  std::vector<ParagraphSample> samples;
  std::string line;
  std::size_t lineno = 0;
  std::size_t feat_dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "dataset line " + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(where + ": invalid JSON");
    if (!j.contains("features") || !j["features"].is_array()) {
      throw ParseError(where + ": missing field 'features'");
    }
    if (!j.contains("sentences") || !j["sentences"].is_array()) {
      throw ParseError(where + ": missing field 'sentences'");
    }
    ParagraphSample s;
    s.features = j["features"].get<std::vector<double>>();
    if (feat_dim == 0) feat_dim = s.features.size();
    if (s.features.empty() || s.features.size() != feat_dim) {
      throw ParseError(where + ": feature length mismatch");
    }
    for (const auto& sent : j["sentences"]) {
      if (!sent.is_array()) throw ParseError(where + ": sentence is not an array");
      std::vector<int> ids;
      for (const auto& w : sent) {
        if (!w.is_string()) throw ParseError(where + ": token is not a string");
        const int id = vocab.id(w.get<std::string>());
        if (id < 0) throw ParseError(where + ": token out of vocabulary: " + w.get<std::string>());
        ids.push_back(id);
      }
      s.sentences.push_back(std::move(ids));
    }
    if (s.sentences.empty()) throw ParseError(where + ": paragraph has no sentences");
    if (j.contains("stars")) {
      const int st = j["stars"].get<int>();
      if (st < 1 || st > 5) throw ParseError(where + ": stars must be in 1..5");
      s.stars = st;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<ParagraphSample> make_corpus(std::size_t n_scenes, int k, bool with_stars,
                                         std::uint64_t master_seed, std::size_t feat_dim) {
  const auto& vocab = grammar_vocabulary();
  std::vector<ParagraphSample> out;
  out.reserve(n_scenes * static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n_scenes; ++i) {
    const std::uint64_t scene_seed = splitmix64(master_seed + i);
    Scene scene = generate_scene(scene_seed);
    std::optional<int> stars;
    if (with_stars) {
      Rng r(splitmix64(scene_seed ^ 0x57A85ull));
      stars = static_cast<int>(1 + r.below(5));
    }
    auto features = scene_to_features(scene, feat_dim);
    for (auto& para : scene_to_paragraphs(scene, k, stars)) {
      ParagraphSample s;
      s.features = features;
      s.stars = stars;
      s.scene = scene;
      for (auto& sent : para) {
        std::vector<int> ids;
        for (auto& w : sent) {
          const int id = vocab.id(w);
          if (id < 0) throw ContractViolation("grammar produced out-of-vocabulary token: " + w);
          ids.push_back(id);
        }
        s.sentences.push_back(std::move(ids));
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace paragen::corpus
