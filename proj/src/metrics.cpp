#include "paragen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace paragen::metrics {

namespace {

using NGram = std::vector<int>;
using Counts = std::map<NGram, double>;

Counts ngram_counts(const std::vector<int>& tokens, int n) {
  Counts out;
  if (static_cast<int>(tokens.size()) < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out[NGram(tokens.begin() + i, tokens.begin() + i + n)] += 1.0;
  }
  return out;
}

}  // namespace

double bleu(const std::vector<EvalPair>& corpus, int n) {
  if (corpus.empty()) throw ContractViolation("bleu: empty corpus");
  if (n < 1 || n > 4) throw ContractViolation("bleu: n must be in 1..4");
  for (const auto& p : corpus) {
    if (p.references.empty()) throw ContractViolation("bleu: candidate without references");
  }

  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  for (const auto& p : corpus) {
    cand_len += p.candidate.size();
    // closest reference length; ties to the shorter one
    std::size_t best = p.references[0].size();
    for (const auto& r : p.references) {
      const auto diff = [&](std::size_t len) {
        return len > p.candidate.size() ? len - p.candidate.size() : p.candidate.size() - len;
      };
      if (diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best)) {
        best = r.size();
      }
    }
    ref_len += best;
  }
  if (cand_len == 0) return 0.0;

  double log_precision_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    double clipped = 0.0;
    double total = 0.0;
    for (const auto& p : corpus) {
      auto cand = ngram_counts(p.candidate, k);
      Counts max_ref;
      for (const auto& r : p.references) {
        for (const auto& [g, c] : ngram_counts(r, k)) {
          auto& m = max_ref[g];
          m = std::max(m, c);
        }
      }
      for (const auto& [g, c] : cand) {
        total += c;
        auto it = max_ref.find(g);
        if (it != max_ref.end()) clipped += std::min(c, it->second);
      }
    }
    if (total == 0.0 || clipped == 0.0) return 0.0;  // no smoothing
    log_precision_sum += std::log(clipped / total);
  }

  const double bp = cand_len >= ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) /
                                             static_cast<double>(cand_len));
  return bp * std::exp(log_precision_sum / n);
}

double cider(const std::vector<EvalPair>& corpus) {
  if (corpus.empty()) throw ContractViolation("cider: empty corpus");
  for (const auto& p : corpus) {
    if (p.references.empty()) throw ContractViolation("cider: candidate without references");
  }
  constexpr int kMaxN = 4;
  constexpr double kSigma = 6.0;
  const double logN = std::log(static_cast<double>(corpus.size()));

  // document frequency: one count per corpus entry whose references contain
  // the n-gram at least once
  std::map<NGram, double> df;
  for (const auto& p : corpus) {
    std::map<NGram, bool> seen;
    for (const auto& r : p.references) {
      for (int n = 1; n <= kMaxN; ++n) {
        for (const auto& [g, c] : ngram_counts(r, n)) seen[g] = true;
      }
    }
    for (const auto& [g, flag] : seen) df[g] += 1.0;
  }
  auto idf = [&](const NGram& g) {
    // a 1-entry corpus has every idf at log(1) = 0; a uniform weight cancels
    // in the cosine, so the limit is the plain count cosine (weight 1)
    if (corpus.size() == 1) return 1.0;
    auto it = df.find(g);
    const double d = it == df.end() ? 1.0 : std::max(1.0, it->second);
    return logN - std::log(d);
  };

  double corpus_score = 0.0;
  for (const auto& p : corpus) {
    double pair_score = 0.0;
    for (int n = 1; n <= kMaxN; ++n) {
      auto cand = ngram_counts(p.candidate, n);
      std::map<NGram, double> cand_vec;
      double cand_norm_sq = 0.0;
      for (const auto& [g, c] : cand) {
        const double v = c * idf(g);
        cand_vec[g] = v;
        cand_norm_sq += v * v;
      }
      const double cand_norm = std::sqrt(cand_norm_sq);

      double score_n = 0.0;
      for (const auto& r : p.references) {
        std::map<NGram, double> ref_vec;
        double ref_norm_sq = 0.0;
        for (const auto& [g, c] : ngram_counts(r, n)) {
          const double v = c * idf(g);
          ref_vec[g] = v;
          ref_norm_sq += v * v;
        }
        const double ref_norm = std::sqrt(ref_norm_sq);
        if (cand_norm == 0.0 || ref_norm == 0.0) continue;
        double num = 0.0;
        for (const auto& [g, cv] : cand_vec) {
          auto it = ref_vec.find(g);
          if (it != ref_vec.end()) num += std::min(cv, it->second) * it->second;
        }
        const double delta =
            static_cast<double>(p.candidate.size()) - static_cast<double>(r.size());
        score_n += num / (cand_norm * ref_norm) *
                   std::exp(-delta * delta / (2.0 * kSigma * kSigma));
      }
      pair_score += score_n / static_cast<double>(p.references.size());
    }
    corpus_score += 10.0 * pair_score / kMaxN;
  }
  return corpus_score / static_cast<double>(corpus.size());
}

double self_bleu(const std::vector<std::vector<int>>& paragraphs, int n) {
  if (paragraphs.size() < 2) throw ContractViolation("self_bleu: need at least 2 paragraphs");
  double total = 0.0;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    EvalPair pair;
    pair.candidate = paragraphs[i];
    for (std::size_t j = 0; j < paragraphs.size(); ++j) {
      if (j != i) pair.references.push_back(paragraphs[j]);
    }
    total += bleu({pair}, n);
  }
  return total / static_cast<double>(paragraphs.size());
}

}  // namespace paragen::metrics
