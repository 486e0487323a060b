#include "spoofvqa/vocab.hpp"

#include <cctype>
#include <stdexcept>

#include <json.hpp>

namespace spoofvqa {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (char c : text) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      flush();
    } else if (std::ispunct(u)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

Vocabulary Vocabulary::build(std::span<const std::string> texts) {
  Vocabulary v;
  v.add("<bos>");
  v.add("<eos>");
  v.add("<pad>");
  v.add("Yes");
  v.add("No");
  for (const auto& text : texts)
    for (const auto& tok : tokenize(text))
      if (!v.contains(tok)) v.add(tok);
  return v;
}

void Vocabulary::add(const std::string& token) {
  if (token.empty()) throw std::invalid_argument("vocabulary: empty token");
  if (index_.count(token))
    throw std::invalid_argument("vocabulary: duplicate token '" + token + "'");
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end())
    throw std::out_of_range("vocabulary: unknown token '" + std::string(token) +
                            "'");
  return it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw std::out_of_range("vocabulary: id " + std::to_string(id) +
                            " outside vocabulary of " +
                            std::to_string(tokens_.size()));
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> out;
  for (const auto& tok : tokenize(text)) out.push_back(id(tok));
  return out;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::string out;
  for (int i : ids) {
    if (!out.empty()) out += ' ';
    out += token(i);
  }
  return out;
}

std::string Vocabulary::to_json() const {
  nlohmann::json j = tokens_;
  return j.dump();
}

Vocabulary Vocabulary::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.is_array()) throw std::invalid_argument("vocabulary: expected a JSON array");
  Vocabulary v;
  for (const auto& t : j) v.add(t.get<std::string>());
  if (v.size() < 5 || v.tokens_[kYes] != "Yes" || v.tokens_[kNo] != "No")
    throw std::invalid_argument("vocabulary: reserved tokens missing or misplaced");
  return v;
}

}  // namespace spoofvqa
