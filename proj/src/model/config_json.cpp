#include "lwt/config_json.hpp"

namespace lwt {

void to_json(nlohmann::ordered_json& j, const ModelConfig& c) {
  j = nlohmann::ordered_json{
      {"channels", c.channels},
      {"samples", c.samples},
      {"trunk_filters", c.trunk_filters},
      {"word_filters", c.word_filters},
      {"temporal_kernel", c.temporal_kernel},
      {"word_kernel", c.word_kernel},
      {"length_kernel", c.length_kernel},
      {"length_pool", c.length_pool},
      {"pool", c.pool},
      {"n_short", c.n_short},
      {"n_long", c.n_long},
  };
}

void from_json(const nlohmann::ordered_json& j, ModelConfig& c) {
  j.at("channels").get_to(c.channels);
  j.at("samples").get_to(c.samples);
  j.at("trunk_filters").get_to(c.trunk_filters);
  j.at("word_filters").get_to(c.word_filters);
  j.at("temporal_kernel").get_to(c.temporal_kernel);
  j.at("word_kernel").get_to(c.word_kernel);
  j.at("length_kernel").get_to(c.length_kernel);
  j.at("length_pool").get_to(c.length_pool);
  j.at("pool").get_to(c.pool);
  j.at("n_short").get_to(c.n_short);
  j.at("n_long").get_to(c.n_long);
}

void to_json(nlohmann::ordered_json& j, const AdamWConfig& c) {
  j = nlohmann::ordered_json{{"lr", c.lr},
                             {"beta1", c.beta1},
                             {"beta2", c.beta2},
                             {"epsilon", c.epsilon},
                             {"weight_decay", c.weight_decay}};
}

void from_json(const nlohmann::ordered_json& j, AdamWConfig& c) {
  j.at("lr").get_to(c.lr);
  j.at("beta1").get_to(c.beta1);
  j.at("beta2").get_to(c.beta2);
  j.at("epsilon").get_to(c.epsilon);
  j.at("weight_decay").get_to(c.weight_decay);
}

void to_json(nlohmann::ordered_json& j, const SynthSpec& s) {
  nlohmann::ordered_json classes;
  for (WordLabel w : kAllWords) {
    classes[std::string(to_string(w))] = s.class_hz[ordinal(w)];
  }
  j = nlohmann::ordered_json{{"n_per_class", s.n_per_class},
                             {"channels", s.channels},
                             {"samples", s.samples},
                             {"sample_rate_hz", s.sample_rate_hz},
                             {"short_group_hz", s.short_group_hz},
                             {"long_group_hz", s.long_group_hz},
                             {"class_hz", classes},
                             {"amplitude", s.amplitude},
                             {"noise_sigma", s.noise_sigma},
                             {"seed", s.seed}};
}

}  // namespace lwt
