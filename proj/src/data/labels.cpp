#include <string>

#include "lwt/data.hpp"
#include "lwt/errors.hpp"

namespace lwt {

namespace {

constexpr std::array<WordLabel, 2> kShortWords{WordLabel::stop,
                                               WordLabel::yes};
constexpr std::array<WordLabel, 3> kLongWords{
    WordLabel::hello, WordLabel::help_me, WordLabel::thank_you};

}  // namespace

HyperLabel hyper_label(WordLabel label) {
  switch (label) {
    case WordLabel::hello:
    case WordLabel::help_me:
    case WordLabel::thank_you:
      return HyperLabel::long_word;
    case WordLabel::stop:
    case WordLabel::yes:
      return HyperLabel::short_word;
  }
  throw ArgumentError("unknown word label");
}

std::span<const WordLabel> branch_words(HyperLabel group) {
  if (group == HyperLabel::short_word) return kShortWords;
  return kLongWords;
}

std::size_t branch_index(WordLabel label) {
  const auto words = branch_words(hyper_label(label));
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] == label) return i;
  }
  throw ArgumentError("word label missing from its branch");
}

std::string_view to_string(WordLabel label) {
  switch (label) {
    case WordLabel::hello: return "hello";
    case WordLabel::help_me: return "help_me";
    case WordLabel::thank_you: return "thank_you";
    case WordLabel::stop: return "stop";
    case WordLabel::yes: return "yes";
  }
  return "?";
}

std::string_view to_string(HyperLabel group) {
  return group == HyperLabel::short_word ? "short" : "long";
}

WordLabel parse_word_label(std::string_view name) {
  for (WordLabel w : kAllWords) {
    if (to_string(w) == name) return w;
  }
  throw ArgumentError("unknown word label '" + std::string(name) + "'");
}

}  // namespace lwt
