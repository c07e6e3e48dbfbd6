#pragma once

#include <vector>

#include "paragen/common.hpp"

namespace paragen::metrics {

// Candidate and references are flat token-id sequences (sentences already
// concatenated; sentence boundaries are not n-gram barriers).
struct EvalPair {
  std::vector<int> candidate;
  std::vector<std::vector<int>> references;
};

// Corpus-level BLEU-n: geometric mean of clipped modified k-gram precisions
// for k = 1..n, no smoothing, brevity penalty with the closest-length
// reference convention (ties go to the shorter reference).
double bleu(const std::vector<EvalPair>& corpus, int n);

// CIDEr-D: TF-IDF weighted n-gram cosine for n = 1..4 with clipped candidate
// counts and a gaussian length penalty (sigma = 6), averaged over n and
// scaled by 10. IDF comes from the reference corpus.
double cider(const std::vector<EvalPair>& corpus);

// Mean BLEU-n of each paragraph against all the others as references;
// 1.0 = identical set, lower = more diverse.
double self_bleu(const std::vector<std::vector<int>>& paragraphs, int n);

}  // namespace paragen::metrics
