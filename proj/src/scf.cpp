#include "spoofvqa/scf.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace spoofvqa {

std::string to_string(SpoofType t) {
  switch (t) {
    case SpoofType::print: return "print";
    case SpoofType::replay: return "replay";
    case SpoofType::mask: return "mask";
    case SpoofType::mannequin: return "mannequin";
  }
  throw std::logic_error("unreachable spoof type");
}

SpoofType spoof_type_from_string(std::string_view s) {
  if (s == "print") return SpoofType::print;
  if (s == "replay") return SpoofType::replay;
  if (s == "mask") return SpoofType::mask;
  if (s == "mannequin") return SpoofType::mannequin;
  throw std::invalid_argument("unknown spoof type '" + std::string(s) + "'");
}

void CaptionRecord::validate() const {
  if (image_id.empty())
    throw std::invalid_argument("caption record: empty image id");
  if (label == RecordLabel::fake && !spoof_type.has_value())
    throw std::invalid_argument("caption record '" + image_id +
                                "': fake without a spoof type");
  if (label == RecordLabel::real && spoof_type.has_value())
    throw std::invalid_argument("caption record '" + image_id +
                                "': real with a spoof type");
}

void KeywordDictionary::add(std::string keyword, SpoofType type) {
  if (keyword.empty())
    throw std::invalid_argument("keyword dictionary: empty keyword");
  for (char& c : keyword) c = static_cast<char>(std::tolower(
      static_cast<unsigned char>(c)));
  if (entries_.count(keyword))
    throw std::invalid_argument("keyword dictionary: duplicate keyword '" +
                                keyword + "'");
  entries_.emplace(std::move(keyword), type);
}

KeywordDictionary KeywordDictionary::defaults() {
  KeywordDictionary d;
  for (const char* k : {"paper", "cardboard", "paper card", "poster", "picture"})
    d.add(k, SpoofType::print);
  for (const char* k : {"screen", "monitor", "cell", "phone", "tablet", "laptop",
                        "ipad"})
    d.add(k, SpoofType::replay);
  for (const char* k : {"mask", "sticker", "plastic", "fake face", "plaster"})
    d.add(k, SpoofType::mask);
  for (const char* k : {"mannequin", "doll", "statue", "sculpture", "fake head"})
    d.add(k, SpoofType::mannequin);
  return d;
}

std::string KeywordDictionary::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, t] : entries_) j[k] = to_string(t);
  return j.dump(2);
}

KeywordDictionary KeywordDictionary::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object())
    throw std::invalid_argument("keyword dictionary: expected a JSON object");
  KeywordDictionary d;
  for (const auto& [k, v] : j.items())
    d.add(k, spoof_type_from_string(v.get<std::string>()));
  return d;
}

namespace {

// lowercase and collapse whitespace runs to single spaces
std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

bool caption_contains(std::string_view caption, std::string_view keyword,
                      MatchMode mode) {
  const std::string text = normalize(caption);
  const std::string needle = normalize(keyword);
  if (needle.empty()) return false;
  std::size_t pos = text.find(needle);
  while (pos != std::string::npos) {
    if (mode == MatchMode::substring) return true;
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) return true;
    pos = text.find(needle, pos + 1);
  }
  return false;
}

std::string ScfStats::to_csv() const {
  std::ostringstream out;
  out << "spoof_type,keyword,before,after\n";
  for (const auto& [type, before] : before_counts) {
    const auto it = after_counts.find(type);
    out << to_string(type) << ",(any)," << before << ","
        << (it == after_counts.end() ? 0 : it->second) << "\n";
  }
  for (const auto& kc : keyword_counts)
    out << to_string(kc.keyword_type) << "," << kc.keyword << "," << kc.before
        << "," << kc.after << "\n";
  return out.str();
}

std::vector<CaptionRecord> filter_spoof_aware(
    std::span<const CaptionRecord> records, const KeywordDictionary& dict,
    MatchMode mode, ScfStats* stats) {
  std::vector<CaptionRecord> retained;
  std::map<std::string, KeywordCount> counts;
  if (stats != nullptr) {
    for (const auto& [k, t] : dict.entries())
      counts.emplace(k, KeywordCount{t, k, 0, 0});
  }
  for (const auto& rec : records) {
    rec.validate();
    if (rec.label != RecordLabel::fake)
      throw std::invalid_argument("filter: record '" + rec.image_id +
                                  "' is not a fake sample");
    bool keep = false;
    for (const auto& [keyword, type] : dict.entries()) {
      if (!caption_contains(rec.caption, keyword, mode)) continue;
      if (stats != nullptr) counts[keyword].before += 1;
      if (type == *rec.spoof_type) keep = true;
    }
    if (stats != nullptr) {
      stats->before_counts[*rec.spoof_type] += 1;
      if (keep) {
        stats->after_counts[*rec.spoof_type] += 1;
        for (const auto& [keyword, type] : dict.entries())
          if (caption_contains(rec.caption, keyword, mode))
            counts[keyword].after += 1;
      }
    }
    if (keep) retained.push_back(rec);
  }
  if (stats != nullptr) {
    stats->keyword_counts.clear();
    for (auto& [k, kc] : counts) stats->keyword_counts.push_back(kc);
  }
  return retained;
}

CaptionedDataset assemble_dcap(std::span<const CaptionRecord> reals,
                               std::span<const CaptionRecord> fakes) {
  CaptionedDataset out;
  std::set<std::string> seen;
  auto ingest = [&](const CaptionRecord& rec, bool expect_real) {
    rec.validate();
    if (expect_real != (rec.label == RecordLabel::real))
      throw std::invalid_argument("assemble: record '" + rec.image_id +
                                  "' is on the wrong side of the union");
    if (rec.caption.empty())
      throw std::invalid_argument("assemble: record '" + rec.image_id +
                                  "' has no caption");
    const auto want = expect_real ? CaptionSource::general
                                  : CaptionSource::spoof_aware;
    if (rec.caption_source != want)
      throw std::invalid_argument(
          "assemble: record '" + rec.image_id + "' must carry a " +
          (expect_real ? std::string("general") : std::string("spoof-aware")) +
          " caption");
    if (!seen.insert(rec.image_id).second)
      throw std::invalid_argument("assemble: duplicate image id '" +
                                  rec.image_id + "'");
    out.entries.push_back(rec);
  };
  for (const auto& r : reals) {
    ingest(r, true);
    out.real_count += 1;
  }
  for (const auto& f : fakes) {
    ingest(f, false);
    out.fake_counts[*f.spoof_type] += 1;
  }
  return out;
}

// ---- captioner stub ----

namespace {

const char* kGeneralTemplates[] = {
    "a man with short hair smiling at the camera",
    "a woman in a red jacket standing indoors",
    "a young man with glasses looking ahead",
    "a woman with long hair in a bright room",
    "a man in a gray sweater facing the lens",
    "a woman wearing a scarf near a window",
};

// keyword pools mirror the default dictionary, one slot per caption
const char* kPrintKeywords[] = {"paper", "cardboard", "paper card", "poster",
                                "picture"};
const char* kReplayKeywords[] = {"screen", "monitor", "cell", "phone", "tablet",
                                 "laptop", "ipad"};
const char* kMaskKeywords[] = {"mask", "sticker", "plastic", "fake face",
                               "plaster"};
const char* kMannequinKeywords[] = {"mannequin", "doll", "statue", "sculpture",
                                    "fake head"};

std::string spoof_template(SpoofType type, Rng& rng) {
  switch (type) {
    case SpoofType::print: {
      const auto& k = kPrintKeywords[rng.index(std::size(kPrintKeywords))];
      return std::string("a face printed on a ") + k + " held up to the camera";
    }
    case SpoofType::replay: {
      const auto& k = kReplayKeywords[rng.index(std::size(kReplayKeywords))];
      return std::string("a face displayed on a ") + k + " in front of the lens";
    }
    case SpoofType::mask: {
      const auto& k = kMaskKeywords[rng.index(std::size(kMaskKeywords))];
      return std::string("a person wearing a ") + k + " over the face";
    }
    case SpoofType::mannequin: {
      const auto& k =
          kMannequinKeywords[rng.index(std::size(kMannequinKeywords))];
      return std::string("a ") + k + " posed in front of the camera";
    }
  }
  throw std::logic_error("unreachable spoof type");
}

}  // namespace

CaptionerStub::CaptionerStub(double hit_rate) : hit_rate_(hit_rate) {
  if (hit_rate < 0.0 || hit_rate > 1.0)
    throw std::invalid_argument("captioner stub: hit rate must lie in [0, 1]");
}

std::string CaptionerStub::caption(RecordLabel label,
                                   std::optional<SpoofType> type,
                                   CaptionSource mode, Rng& rng) const {
  if (mode == CaptionSource::spoof_aware && label == RecordLabel::fake) {
    if (!type.has_value())
      throw std::invalid_argument("captioner stub: fake without a spoof type");
    if (rng.bernoulli(hit_rate_)) return spoof_template(*type, rng);
    return std::string("a blurred face held close to the camera");
  }
  return kGeneralTemplates[rng.index(std::size(kGeneralTemplates))];
}

// ---- corpus I/O ----

std::string record_to_json(const CaptionRecord& r) {
  nlohmann::json j;
  j["image_id"] = r.image_id;
  j["label"] = r.label == RecordLabel::real ? "real" : "fake";
  if (r.spoof_type.has_value()) j["spoof_type"] = to_string(*r.spoof_type);
  j["caption"] = r.caption;
  j["caption_source"] =
      r.caption_source == CaptionSource::general ? "general" : "spoof_aware";
  return j.dump();
}

namespace {

CaptionRecord record_from_json(const nlohmann::json& j) {
  CaptionRecord r;
  r.image_id = j.at("image_id").get<std::string>();
  const std::string label = j.at("label").get<std::string>();
  if (label == "real") {
    r.label = RecordLabel::real;
  } else if (label == "fake") {
    r.label = RecordLabel::fake;
  } else {
    throw std::invalid_argument("label must be 'real' or 'fake', got '" +
                                label + "'");
  }
  if (j.contains("spoof_type") && !j.at("spoof_type").is_null())
    r.spoof_type = spoof_type_from_string(j.at("spoof_type").get<std::string>());
  r.caption = j.at("caption").get<std::string>();
  const std::string source = j.at("caption_source").get<std::string>();
  if (source == "general") {
    r.caption_source = CaptionSource::general;
  } else if (source == "spoof_aware") {
    r.caption_source = CaptionSource::spoof_aware;
  } else {
    throw std::invalid_argument("caption_source must be 'general' or "
                                "'spoof_aware', got '" + source + "'");
  }
  r.validate();
  return r;
}

}  // namespace

std::vector<CaptionRecord> parse_corpus(std::string_view text) {
  std::vector<CaptionRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("corpus line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
    if (end == text.size()) break;
  }
  return out;
}

std::vector<CaptionRecord> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

void write_corpus(const std::string& path,
                  std::span<const CaptionRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file '" + path + "'");
  for (const auto& r : records) out << record_to_json(r) << "\n";
}

}  // namespace spoofvqa
