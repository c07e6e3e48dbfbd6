#pragma once

#include <json.hpp>

#include "paragen/model.hpp"

namespace paragen {

inline void to_json(nlohmann::json& j, const Hyper& h) {
  j = nlohmann::json{{"feat_dim", h.feat_dim},
                     {"hidden", h.hidden},
                     {"vocab", h.vocab},
                     {"max_sentences", h.max_sentences},
                     {"max_words", h.max_words},
                     {"couple_alpha", h.couple_alpha},
                     {"couple_beta", h.couple_beta},
                     {"lambda_s", h.lambda_s},
                     {"lambda_w", h.lambda_w},
                     {"no_coherence", h.no_coherence},
                     {"no_global", h.no_global},
                     {"use_stars", h.use_stars},
                     {"vae", h.vae}};
}

inline void from_json(const nlohmann::json& j, Hyper& h) {
  j.at("feat_dim").get_to(h.feat_dim);
  j.at("hidden").get_to(h.hidden);
  j.at("vocab").get_to(h.vocab);
  j.at("max_sentences").get_to(h.max_sentences);
  j.at("max_words").get_to(h.max_words);
  j.at("couple_alpha").get_to(h.couple_alpha);
  j.at("couple_beta").get_to(h.couple_beta);
  j.at("lambda_s").get_to(h.lambda_s);
  j.at("lambda_w").get_to(h.lambda_w);
  j.at("no_coherence").get_to(h.no_coherence);
  j.at("no_global").get_to(h.no_global);
  j.at("use_stars").get_to(h.use_stars);
  j.at("vae").get_to(h.vae);
}

}  // namespace paragen
