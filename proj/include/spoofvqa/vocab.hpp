#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace spoofvqa {

// Whitespace + punctuation tokenizer over a closed vocabulary. Punctuation
// characters become single-character tokens.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;  // empty; build() or from_json() fill it

  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kPad = 2;
  static constexpr int kYes = 3;
  static constexpr int kNo = 4;

  // Reserved tokens plus every token of every text, in first-seen order.
  static Vocabulary build(std::span<const std::string> texts);

  int id(std::string_view token) const;  // throws on unknown token
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }

  std::vector<int> encode(std::string_view text) const;
  std::string decode(std::span<const int> ids) const;

  // JSON array of token strings in id order
  std::string to_json() const;
  static Vocabulary from_json(const std::string& json_text);

 private:
  void add(const std::string& token);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace spoofvqa
