#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paragen/checkpoint.hpp"
#include "paragen/metrics.hpp"
#include "paragen/serde.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace paragen;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read config file: " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON in config file: " + path.string());
  return j;
}

corpus::Vocabulary load_vocab_or_grammar(const std::string& path) {
  if (path.empty()) return corpus::grammar_vocabulary();
  return corpus::Vocabulary::load(path);
}

void apply_mode(Hyper& hp, const std::string& mode) {
  if (mode == "plain") return;
  if (mode == "vae") {
    hp.vae = true;
  } else if (mode == "ablation-nc") {
    hp.no_coherence = true;
  } else if (mode == "ablation-ng") {
    hp.no_global = true;
  } else {
    throw ParseError("config field 'mode': unknown value '" + mode +
                     "' (expected plain, vae, ablation-nc or ablation-ng)");
  }
}

std::string decoded_line(const corpus::Vocabulary& vocab, std::size_t id, int sample,
                         const Paragraph& para) {
  json sents = json::array();
  for (const auto& sent : para) {
    json words = json::array();
    for (int tok : sent) words.push_back(vocab.token(tok));
    sents.push_back(std::move(words));
  }
  json j;
  j["id"] = id;
  j["sample"] = sample;
  j["sentences"] = std::move(sents);
  return j.dump();
}

// eval files carry token strings; metrics run on interned ids
struct EvalFileEntry {
  std::size_t id = 0;
  std::vector<int> tokens;
};

std::vector<EvalFileEntry> load_eval_file(const fs::path& path,
                                          std::map<std::string, int>& intern) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read file: " + path.string());
  std::vector<EvalFileEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.filename().string() + " line " + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(where + ": invalid JSON");
    if (!j.contains("sentences") || !j["sentences"].is_array()) {
      throw ParseError(where + ": missing field 'sentences'");
    }
    EvalFileEntry e;
    e.id = j.contains("id") ? j["id"].get<std::size_t>() : out.size();
    for (const auto& sent : j["sentences"]) {
      if (!sent.is_array()) throw ParseError(where + ": sentence is not an array");
      for (const auto& w : sent) {
        if (!w.is_string()) throw ParseError(where + ": token is not a string");
        auto [it, inserted] =
            intern.emplace(w.get<std::string>(), static_cast<int>(intern.size()));
        e.tokens.push_back(it->second);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

int cmd_train(const std::string& config_path) {
  json cfg = read_json_file(config_path);
  auto require = [&](const char* field) {
    if (!cfg.contains(field)) {
      throw ParseError(std::string("config field '") + field + "' is required");
    }
  };
  require("dataset");
  require("out_dir");

  auto vocab = load_vocab_or_grammar(cfg.value("vocab", std::string()));
  auto data = corpus::load_dataset(cfg["dataset"].get<std::string>(), vocab);
  if (data.empty()) throw ParseError("dataset is empty: " + cfg["dataset"].get<std::string>());

  Hyper hp;
  hp.vocab = vocab.size();
  hp.feat_dim = cfg.value("feat_dim", data.front().features.size());
  hp.hidden = cfg.value("hidden", hp.hidden);
  hp.max_sentences = cfg.value("max_sentences", hp.max_sentences);
  hp.max_words = cfg.value("max_words", hp.max_words);
  hp.couple_alpha = cfg.value("couple_alpha", hp.couple_alpha);
  hp.couple_beta = cfg.value("couple_beta", hp.couple_beta);
  hp.lambda_s = cfg.value("lambda_s", hp.lambda_s);
  hp.lambda_w = cfg.value("lambda_w", hp.lambda_w);
  hp.use_stars = cfg.value("use_stars", false);
  apply_mode(hp, cfg.value("mode", std::string("plain")));

  TrainConfig tc;
  tc.base_lr = cfg.value("base_lr", tc.base_lr);
  tc.epochs = cfg.value("epochs", tc.epochs);
  tc.seed = cfg.value("seed", tc.seed);
  tc.lr_halve_every = cfg.value("lr_halve_every", tc.lr_halve_every);
  tc.clip_norm = cfg.value("clip_norm", tc.clip_norm);
  tc.kl_weight = cfg.value("kl_weight", tc.kl_weight);
  tc.kl_anneal_epochs = cfg.value("kl_anneal_epochs", tc.kl_anneal_epochs);
  tc.weights.lambda_s = hp.lambda_s;
  tc.weights.lambda_w = hp.lambda_w;
  const int keep_last_k = cfg.value("keep_last_k", 3);
  if (keep_last_k < 1) throw ParseError("config field 'keep_last_k' must be >= 1");

  const fs::path out_dir = cfg["out_dir"].get<std::string>();
  fs::create_directories(out_dir);
  std::ofstream metrics_log(out_dir / "metrics.jsonl", std::ios::binary);
  if (!metrics_log) throw ParseError("cannot write metrics log in " + out_dir.string());

  auto m = Model::init(hp, tc.seed);
  AdamState adam;
  auto epoch_path = [&](int e) {
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_epoch_%04d.bin", e);
    return out_dir / name;
  };

  train(m, data, tc, &adam, nullptr, 0,
        [&](const EpochStats& s, Model& mm, const AdamState& st, const Rng& r) {
          json j;
          j["epoch"] = s.epoch;
          j["lr"] = s.lr;
          j["stop_loss"] = s.stop_loss;
          j["word_loss"] = s.word_loss;
          j["kl"] = s.kl;
          j["per_token_ce"] = s.per_token_ce;
          metrics_log << j.dump() << "\n";
          save_checkpoint(epoch_path(s.epoch), snapshot(mm, &st, s.epoch, tc.seed, &r));
          const int stale = s.epoch - keep_last_k;
          if (stale >= 1) {
            std::error_code ec;
            fs::remove(epoch_path(stale), ec);
          }
          if (mm.hp.no_coherence && mm.coherence_transform_count != 0) {
            throw ContractViolation("ablation-nc run evaluated a coherence vector");
          }
        });

  save_checkpoint(out_dir / "final.bin",
                  snapshot(m, &adam, tc.epochs, tc.seed, nullptr));
  std::printf("trained %d epochs, final checkpoint: %s\n", tc.epochs,
              (out_dir / "final.bin").string().c_str());
  return 0;
}

int cmd_generate(const std::string& ckpt_path, const std::string& input_path,
                 const std::string& output_path, const std::string& vocab_path, int samples,
                 std::uint64_t seed) {
  if (samples < 1) throw ParseError("--samples must be >= 1");
  auto ckpt = load_checkpoint(ckpt_path);
  auto m = restore_model(ckpt);
  auto vocab = load_vocab_or_grammar(vocab_path);
  if (vocab.size() != m.hp.vocab) {
    throw ParseError("vocabulary size " + std::to_string(vocab.size()) +
                     " does not match checkpoint vocab " + std::to_string(m.hp.vocab));
  }
  auto data = corpus::load_dataset(input_path, vocab);
  if (!data.empty() && data.front().features.size() != m.hp.feat_dim) {
    throw ParseError("input feature width " + std::to_string(data.front().features.size()) +
                     " does not match checkpoint feat_dim " + std::to_string(m.hp.feat_dim));
  }
  if (samples > 1 && !m.hp.vae) {
    throw ParseError("--samples > 1 requires a vae checkpoint");
  }

  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw ParseError("cannot write output file: " + output_path);
  Rng rng(seed);
  for (std::size_t i = 0; i < data.size(); ++i) {
    GenConfig gc;
    if (m.hp.use_stars) gc.star = data[i].stars;
    if (m.hp.vae) {
      for (int s = 0; s < samples; ++s) {
        std::vector<double> z(m.hp.hidden);
        for (auto& v : z) v = rng.normal();
        auto para = decode_with_latent(m, z, data[i].features, gc);
        out << decoded_line(vocab, i, s, para) << "\n";
      }
    } else {
      auto para = generate_paragraph(m, data[i].features, gc);
      out << decoded_line(vocab, i, 0, para) << "\n";
    }
  }
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& ref_path,
             const std::string& output_path) {
  std::map<std::string, int> intern;
  auto preds = load_eval_file(pred_path, intern);
  auto refs = load_eval_file(ref_path, intern);
  if (preds.empty()) throw ParseError("predictions file is empty");

  std::map<std::size_t, std::vector<std::vector<int>>> refs_by_id;
  for (auto& r : refs) refs_by_id[r.id].push_back(std::move(r.tokens));

  std::vector<metrics::EvalPair> corpus;
  std::set<std::size_t> pred_ids;
  std::string missing;
  for (const auto& p : preds) {
    pred_ids.insert(p.id);
    auto it = refs_by_id.find(p.id);
    if (it == refs_by_id.end()) {
      missing += (missing.empty() ? "" : ", ") + std::to_string(p.id);
      continue;
    }
    metrics::EvalPair pair;
    pair.candidate = p.tokens;
    pair.references = it->second;
    corpus.push_back(std::move(pair));
  }
  if (!missing.empty()) throw ParseError("prediction ids without references: " + missing);
  for (const auto& [id, r] : refs_by_id) {
    if (!pred_ids.count(id)) missing += (missing.empty() ? "" : ", ") + std::to_string(id);
  }
  if (!missing.empty()) throw ParseError("reference ids without predictions: " + missing);

  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw ParseError("cannot write results file: " + output_path);
  char buf[64];
  auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.12f", v);
    out << key << " " << buf << "\n";
  };
  for (int n = 1; n <= 4; ++n) {
    emit(("bleu_" + std::to_string(n)).c_str(), metrics::bleu(corpus, n));
  }
  emit("cider", metrics::cider(corpus));
  if (preds.size() >= 2) {
    std::vector<std::vector<int>> paras;
    for (const auto& p : preds) paras.push_back(p.tokens);
    emit("self_bleu_4", metrics::self_bleu(paras, 4));
  }
  return 0;
}

int cmd_gradcheck() {
  Hyper hp;
  hp.feat_dim = 12;
  hp.hidden = 8;
  hp.vocab = 20;
  corpus::ParagraphSample sample;
  sample.features.assign(hp.feat_dim, 0.0);
  Rng frng(17);
  for (auto& f : sample.features) f = frng.uniform(-1.0, 1.0);
  sample.sentences = {{4, 9, 13}, {6, 3, 18}};

  bool ok = true;
  auto report = [&](const char* name, double err, double tol) {
    std::printf("%-22s max rel err %.3e (tolerance %.0e): %s\n", name, err, tol,
                err < tol ? "ok" : "FAIL");
    if (err >= tol) ok = false;
  };

  {
    auto m = Model::init(hp, 101);
    std::vector<ad::Var> params;
    for (const auto& [name, p] : m.store.params()) params.push_back(p);
    auto f = [&] {
      m.store.zero_grad();
      return example_loss(m, sample, LossWeights{}).total;
    };
    report("joint loss", ad::grad_check(f, params, std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5, 1e-6}), 1e-4);
  }
  {
    Hyper vh = hp;
    vh.vae = true;
    auto m = Model::init(vh, 202);
    std::vector<double> eps(vh.hidden);
    Rng erng(7);
    for (auto& e : eps) e = erng.normal();
    std::vector<ad::Var> params;
    for (const auto& [name, p] : m.store.params()) params.push_back(p);
    auto f = [&] {
      m.store.zero_grad();
      return example_loss(m, sample, LossWeights{}, 1.0, &eps).total;
    };
    report("elbo loss", ad::grad_check(f, params, std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5, 1e-6}), 1e-4);
  }
  return ok ? 0 : 1;
}

int cmd_make_corpus(std::size_t scenes, int refs, bool stars, std::uint64_t seed,
                    std::size_t feat_dim, const std::string& output_path,
                    const std::string& vocab_out) {
  auto samples = corpus::make_corpus(scenes, refs, stars, seed, feat_dim);
  const auto& vocab = corpus::grammar_vocabulary();
  corpus::save_dataset(output_path, samples, vocab);
  if (!vocab_out.empty()) vocab.save(vocab_out);
  std::printf("wrote %zu samples (%zu scenes x %d references) to %s\n", samples.size(), scenes,
              refs, output_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical paragraph generator"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "train a model from a JSON config");
  train_cmd->add_option("--config", config_path, "JSON config file")->required();

  std::string ckpt_path, input_path, output_path, vocab_path;
  int samples = 1;
  std::uint64_t seed = 0;
  auto* gen_cmd = app.add_subcommand("generate", "decode paragraphs from a checkpoint");
  gen_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  gen_cmd->add_option("--input", input_path, "JSONL dataset with features")->required();
  gen_cmd->add_option("--output", output_path, "JSONL predictions output")->required();
  gen_cmd->add_option("--vocab", vocab_path, "vocabulary file (default: built-in grammar)");
  gen_cmd->add_option("--samples", samples, "latent samples per input (vae checkpoints)");
  gen_cmd->add_option("--seed", seed, "sampling seed");

  std::string pred_path, ref_path, results_path;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against references");
  eval_cmd->add_option("--predictions", pred_path, "JSONL predictions")->required();
  eval_cmd->add_option("--references", ref_path, "JSONL references")->required();
  eval_cmd->add_option("--output", results_path, "flat key/value results file")->required();

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");

  std::size_t scenes = 100;
  int refs = 3;
  bool stars = false;
  std::uint64_t corpus_seed = 0;
  std::size_t feat_dim = 16;
  std::string corpus_out, vocab_out;
  auto* mk_cmd = app.add_subcommand("make-corpus", "write a synthetic scene corpus");
  mk_cmd->add_option("--scenes", scenes, "number of scenes");
  mk_cmd->add_option("--refs", refs, "reference paragraphs per scene");
  mk_cmd->add_flag("--stars", stars, "attach star ratings and sentiment sentences");
  mk_cmd->add_option("--seed", corpus_seed, "master seed");
  mk_cmd->add_option("--feat-dim", feat_dim, "feature width");
  mk_cmd->add_option("--output", corpus_out, "JSONL output path")->required();
  mk_cmd->add_option("--vocab-out", vocab_out, "also write the grammar vocabulary here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(config_path);
    if (*gen_cmd) return cmd_generate(ckpt_path, input_path, output_path, vocab_path, samples, seed);
    if (*eval_cmd) return cmd_eval(pred_path, ref_path, results_path);
    if (*grad_cmd) return cmd_gradcheck();
    if (*mk_cmd)
      return cmd_make_corpus(scenes, refs, stars, corpus_seed, feat_dim, corpus_out, vocab_out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  return 1;
}
