#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "paragen/model.hpp"

namespace paragen::corpus {

// token <-> id map; lines 0/1/2 of a vocabulary file are reserved.
class Vocabulary {
public:
  Vocabulary();

  int add(const std::string& token);  // idempotent
  int id(const std::string& token) const;  // -1 when absent
  const std::string& token(int id) const;
  bool contains(const std::string& token) const { return id(token) >= 0; }
  std::size_t size() const { return tokens_.size(); }

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

struct Scene {
  int meta_concept = 0;
  std::vector<int> objects;     // indices into the concept's object list
  std::vector<int> attributes;  // one per object, index into attribute list
  std::uint64_t seed = 0;
};

struct ParagraphSample {
  std::vector<double> features;
  std::vector<std::vector<int>> sentences;  // token ids, no EOS
  std::optional<int> stars;
  std::optional<Scene> scene;  // synthetic-only provenance
};

// The full grammar vocabulary (meta-concepts, objects, attributes, template
// words, sentiment words); identical on every call.
const Vocabulary& grammar_vocabulary();

std::size_t meta_concept_count();
const std::string& meta_concept_name(int mc);

Scene generate_scene(std::uint64_t seed);

// Sum of fixed random token embeddings plus N(0, 0.1) noise keyed on the
// scene seed; deterministic for a given (scene, feat_dim).
std::vector<double> scene_to_features(const Scene& scene, std::size_t feat_dim);

// Template paragraphs with an explicit topic chain: sentence i re-mentions a
// word of sentence i-1. The variant index selects a register (word choices
// consistent across the whole paragraph), so references of one scene differ
// from their first token on. Stars inject rating-dependent sentiment words.
std::vector<std::vector<std::string>> scene_to_paragraph(const Scene& scene, int variant,
                                                         std::optional<int> stars);
std::vector<std::vector<std::vector<std::string>>> scene_to_paragraphs(
    const Scene& scene, int k, std::optional<int> stars = std::nullopt);

int reference_variant_count();

// One JSON object per line:
//   {"features": [...], "sentences": [["tok", ...], ...], "stars": 1..5?}
void save_dataset(const std::filesystem::path& path,
                  const std::vector<ParagraphSample>& samples, const Vocabulary& vocab);
std::vector<ParagraphSample> load_dataset(const std::filesystem::path& path,
                                          const Vocabulary& vocab);

// n_scenes scenes, k reference paragraphs each (one sample per reference);
// a pure function of master_seed.
std::vector<ParagraphSample> make_corpus(std::size_t n_scenes, int k, bool with_stars,
                                         std::uint64_t master_seed, std::size_t feat_dim);

}  // namespace paragen::corpus
