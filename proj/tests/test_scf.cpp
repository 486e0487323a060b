#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "spoofvqa/rng.hpp"
#include "spoofvqa/scf.hpp"

using namespace spoofvqa;

namespace {

CaptionRecord fake(std::string id, SpoofType type, std::string caption) {
  return {std::move(id), RecordLabel::fake, type, std::move(caption),
          CaptionSource::general};
}

CaptionRecord real(std::string id, std::string caption,
                   CaptionSource source = CaptionSource::general) {
  return {std::move(id), RecordLabel::real, std::nullopt, std::move(caption),
          source};
}

// independent normalization + scan, written fresh for the oracle
std::string lower_collapse(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<CaptionRecord> brute_force_filter(
    const std::vector<CaptionRecord>& records, const KeywordDictionary& dict) {
  std::vector<CaptionRecord> out;
  for (const auto& rec : records) {
    bool keep = false;
    const std::string text = lower_collapse(rec.caption);
    for (const auto& [keyword, type] : dict.entries()) {
      if (text.find(lower_collapse(keyword)) != std::string::npos &&
          type == *rec.spoof_type)
        keep = true;
    }
    if (keep) out.push_back(rec);
  }
  return out;
}

bool same_records(const std::vector<CaptionRecord>& a,
                  const std::vector<CaptionRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].image_id != b[i].image_id || a[i].caption != b[i].caption)
      return false;
  return true;
}

const SpoofType kAllTypes[] = {SpoofType::print, SpoofType::replay,
                               SpoofType::mask, SpoofType::mannequin};

std::vector<CaptionRecord> random_corpus(Rng& rng, std::size_t n,
                                         double hit_rate) {
  CaptionerStub stub(hit_rate);
  std::vector<CaptionRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    SpoofType type = kAllTypes[rng.index(4)];
    CaptionRecord r = fake("f" + std::to_string(i), type, "");
    r.caption = stub.caption(RecordLabel::fake, type, CaptionSource::spoof_aware,
                             rng);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TEST_CASE("default dictionary carries the four keyword families") {
  auto dict = KeywordDictionary::defaults();
  CHECK(dict.size() == 22);
  std::map<SpoofType, std::size_t> per_type;
  for (const auto& [k, t] : dict.entries()) per_type[t] += 1;
  CHECK(per_type[SpoofType::print] == 5);
  CHECK(per_type[SpoofType::replay] == 7);
  CHECK(per_type[SpoofType::mask] == 5);
  CHECK(per_type[SpoofType::mannequin] == 5);
  CHECK(dict.entries().at("paper") == SpoofType::print);
  CHECK(dict.entries().at("screen") == SpoofType::replay);
  CHECK(dict.entries().at("fake face") == SpoofType::mask);
  CHECK(dict.entries().at("fake head") == SpoofType::mannequin);
}

TEST_CASE("filter keeps type-matching captions and drops the rest") {
  auto dict = KeywordDictionary::defaults();
  std::vector<CaptionRecord> records{
      fake("a", SpoofType::print, "a man holding a paper with a photo"),
      fake("b", SpoofType::print, "a man wearing glasses"),
      fake("c", SpoofType::print, "face on a screen"),
  };
  auto kept = filter_spoof_aware(records, dict);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].image_id == "a");
  CHECK(same_records(kept, brute_force_filter(records, dict)));
}

TEST_CASE("substring semantics by default, word boundaries behind the flag") {
  auto dict = KeywordDictionary::defaults();
  std::vector<CaptionRecord> records{
      fake("m1", SpoofType::mask, "a masked person near the door"),
      fake("r1", SpoofType::replay, "an excellent day outside"),
  };
  auto loose = filter_spoof_aware(records, dict, MatchMode::substring);
  REQUIRE(loose.size() == 2);  // "mask" in "masked", "cell" in "excellent"

  auto strict = filter_spoof_aware(records, dict, MatchMode::word_boundary);
  CHECK(strict.empty());

  CHECK(caption_contains("a PAPER  card on the desk", "paper card"));
  CHECK(caption_contains("shown on an iPad screen", "ipad"));
  CHECK_FALSE(caption_contains("a papery texture", "paper",
                               MatchMode::word_boundary));
  CHECK(caption_contains("a paper, slightly bent", "paper",
                         MatchMode::word_boundary));
}

TEST_CASE("retention rate follows the stub hit rate") {
  Rng rng(404);
  auto dict = KeywordDictionary::defaults();

  auto all = random_corpus(rng, 500, 1.0);
  CHECK(filter_spoof_aware(all, dict).size() == 500);

  auto none = random_corpus(rng, 500, 0.0);
  CHECK(filter_spoof_aware(none, dict).empty());

  auto half = random_corpus(rng, 10000, 0.5);
  const double rate =
      static_cast<double>(filter_spoof_aware(half, dict).size()) / 10000.0;
  CHECK(rate > 0.48);
  CHECK(rate < 0.52);
}

TEST_CASE("general captions never trip the dictionary") {
  Rng rng(405);
  CaptionerStub stub(1.0);
  auto dict = KeywordDictionary::defaults();
  for (int i = 0; i < 200; ++i) {
    const auto caption = stub.caption(
        i % 2 == 0 ? RecordLabel::real : RecordLabel::fake,
        i % 2 == 0 ? std::nullopt : std::optional(SpoofType::print),
        CaptionSource::general, rng);
    for (const auto& [keyword, type] : dict.entries())
      CHECK_FALSE(caption_contains(caption, keyword));
  }
  // injected spoof-aware captions contain only own-type keywords
  for (SpoofType type : kAllTypes) {
    for (int i = 0; i < 50; ++i) {
      const auto caption = stub.caption(RecordLabel::fake, type,
                                        CaptionSource::spoof_aware, rng);
      bool own = false;
      for (const auto& [keyword, kt] : dict.entries()) {
        if (!caption_contains(caption, keyword)) continue;
        CHECK(kt == type);
        own = true;
      }
      CHECK(own);
    }
  }
}

TEST_CASE("pipeline equals the naive double loop on seeded corpora") {
  Rng rng(406);
  auto dict = KeywordDictionary::defaults();
  for (int rep = 0; rep < 4; ++rep) {
    Rng local = rng.stream("corpus" + std::to_string(rep));
    auto corpus = random_corpus(local, 2000, 0.3 + 0.2 * rep);
    auto kept = filter_spoof_aware(corpus, dict);
    CHECK(same_records(kept, brute_force_filter(corpus, dict)));
  }
}

TEST_CASE("idempotence and dictionary monotonicity") {
  Rng rng(407);
  auto dict = KeywordDictionary::defaults();
  for (int rep = 0; rep < 50; ++rep) {
    Rng local = rng.stream("case" + std::to_string(rep));
    auto corpus = random_corpus(local, 40, local.uniform());
    auto once = filter_spoof_aware(corpus, dict);
    auto twice = filter_spoof_aware(once, dict);
    CHECK(same_records(once, twice));

    // a shrunken dictionary retains no more than the full one
    KeywordDictionary small;
    small.add("paper", SpoofType::print);
    small.add("screen", SpoofType::replay);
    auto small_kept = filter_spoof_aware(corpus, small);
    CHECK(small_kept.size() <= once.size());
    // and every record the small dictionary keeps, the larger one keeps too
    for (const auto& r : small_kept)
      CHECK(std::any_of(once.begin(), once.end(), [&](const CaptionRecord& o) {
        return o.image_id == r.image_id;
      }));
  }
}

TEST_CASE("every retained record has a type-matching keyword") {
  Rng rng(408);
  auto dict = KeywordDictionary::defaults();
  auto corpus = random_corpus(rng, 1000, 0.6);
  for (const auto& rec : filter_spoof_aware(corpus, dict)) {
    bool matching = false;
    bool mismatching = false;
    for (const auto& [keyword, type] : dict.entries()) {
      if (!caption_contains(rec.caption, keyword)) continue;
      (type == *rec.spoof_type ? matching : mismatching) = true;
    }
    CHECK(matching);
    // stub captions carry exactly one keyword, so separation is strict here
    CHECK_FALSE(mismatching);
  }
}

TEST_CASE("filter rejects records that are not proper fakes") {
  auto dict = KeywordDictionary::defaults();
  std::vector<CaptionRecord> with_real{real("r", "a person indoors")};
  CHECK_THROWS_AS(filter_spoof_aware(with_real, dict), std::invalid_argument);

  CaptionRecord broken{"x", RecordLabel::fake, std::nullopt, "a paper",
                       CaptionSource::general};
  std::vector<CaptionRecord> bad{broken};
  CHECK_THROWS_AS(filter_spoof_aware(bad, dict), std::invalid_argument);
}

TEST_CASE("assemble unions reals and fakes with provenance checks") {
  std::vector<CaptionRecord> reals{real("r1", "a woman near a window"),
                                   real("r2", "a man facing the lens")};
  std::vector<CaptionRecord> fakes{
      fake("f1", SpoofType::print, "a face printed on a poster"),
      fake("f2", SpoofType::replay, "a face displayed on a tablet")};
  for (auto& f : fakes) f.caption_source = CaptionSource::spoof_aware;

  auto dcap = assemble_dcap(reals, fakes);
  CHECK(dcap.entries.size() == 4);
  CHECK(dcap.real_count == 2);
  CHECK(dcap.fake_counts[SpoofType::print] == 1);
  CHECK(dcap.fake_counts[SpoofType::replay] == 1);

  auto reals_only = assemble_dcap(reals, {});
  CHECK(reals_only.entries.size() == 2);
  for (const auto& e : reals_only.entries)
    CHECK(e.caption_source == CaptionSource::general);

  std::vector<CaptionRecord> dup{reals[0], real("r1", "another caption")};
  CHECK_THROWS_WITH_AS(assemble_dcap(dup, fakes),
                       doctest::Contains("duplicate image id"),
                       std::invalid_argument);

  std::vector<CaptionRecord> missing{real("r9", "")};
  CHECK_THROWS_AS(assemble_dcap(missing, {}), std::invalid_argument);

  // a general-sourced fake cannot enter the spoof-aware side
  std::vector<CaptionRecord> wrong_side{
      fake("f9", SpoofType::mask, "a person wearing a mask")};
  CHECK_THROWS_AS(assemble_dcap(reals, wrong_side), std::invalid_argument);
}

TEST_CASE("stats CSV totals match an independent recount") {
  Rng rng(409);
  auto dict = KeywordDictionary::defaults();
  auto corpus = random_corpus(rng, 1000, 0.55);
  ScfStats stats;
  auto kept = filter_spoof_aware(corpus, dict, MatchMode::substring, &stats);

  std::size_t before_total = 0, after_total = 0;
  for (const auto& [t, n] : stats.before_counts) before_total += n;
  for (const auto& [t, n] : stats.after_counts) after_total += n;
  CHECK(before_total == corpus.size());
  CHECK(after_total == kept.size());

  // recount each keyword from scratch
  for (const auto& kc : stats.keyword_counts) {
    std::size_t before = 0, after = 0;
    for (const auto& rec : corpus)
      if (caption_contains(rec.caption, kc.keyword)) before += 1;
    for (const auto& rec : kept)
      if (caption_contains(rec.caption, kc.keyword)) after += 1;
    CHECK(kc.before == before);
    CHECK(kc.after == after);
  }

  const std::string csv = stats.to_csv();
  CHECK(csv.starts_with("spoof_type,keyword,before,after\n"));
  CHECK(csv.find("(any)") != std::string::npos);
}

TEST_CASE("corpus files round-trip and parse errors carry line numbers") {
  std::vector<CaptionRecord> records{
      real("r1", "a woman near a window"),
      fake("f1", SpoofType::mask, "a person wearing a plastic mask")};
  std::string blob;
  for (const auto& r : records) blob += record_to_json(r) + "\n";
  auto parsed = parse_corpus(blob);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].image_id == "r1");
  CHECK(parsed[1].spoof_type == SpoofType::mask);
  CHECK(parsed[1].label == RecordLabel::fake);

  const std::string bad = blob + "{not json}\n";
  CHECK_THROWS_WITH_AS(parse_corpus(bad), doctest::Contains("line 3"),
                       std::invalid_argument);
}
