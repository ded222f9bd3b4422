#include "itemseg/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace itemseg {

const std::array<ItemProfile, kItemCount>& annotated_corpus_profile() {
  static const std::array<ItemProfile, kItemCount> kProfile = {{
      {0.98, 163.50},   // 1
      {0.74, 80.62},    // 1A
      {0.69, 1.61},     // 1B
      {0.0008, 0.04},   // 1C
      {0.97, 25.60},    // 2
      {0.98, 7.80},     // 3
      {0.95, 6.54},     // 4
      {0.98, 23.92},    // 5
      {0.95, 23.51},    // 6
      {0.98, 224.85},   // 7
      {0.91, 13.71},    // 7A
      {0.98, 389.22},   // 8
      {0.97, 2.81},     // 9
      {0.93, 13.23},    // 9A
      {0.77, 10.99},    // 9B
      {0.95, 21.51},    // 10
      {0.95, 32.82},    // 11
      {0.95, 15.31},    // 12
      {0.95, 7.14},     // 13
      {0.86, 6.79},     // 14
      {0.99, 62.78},    // 15
      {0.01, 0.10},     // 16
  }};
  return kProfile;
}

SynthSpec SynthSpec::from_profile(double length_scale) {
  SynthSpec spec;
  const auto& profile = annotated_corpus_profile();
  for (std::size_t k = 0; k < kItemCount; ++k) {
    spec.inclusion[k] = profile[k].prevalence;
    spec.mean_item_lines[k] = std::max(2.0, profile[k].lines_per_report / profile[k].prevalence * length_scale);
  }
  return spec;
}

void SynthSpec::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  for (std::size_t k = 0; k < kItemCount; ++k) {
    if (!prob(inclusion[k])) throw std::invalid_argument("inclusion probability outside [0, 1]");
    if (!(mean_item_lines[k] >= 2.0)) throw std::invalid_argument("mean item length below 2 lines");
  }
  if (!prob(toc_probability) || !prob(noise_rate)) throw std::invalid_argument("probability outside [0, 1]");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Samplers built directly on the engine output, so corpora do not depend on
// the standard library's distribution implementations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }

  template <typename T, std::size_t N>
  const T& pick(const std::array<T, N>& options) {
    return options[below(N)];
  }

  /// Knuth's method in chunks of mean at most 30.
  std::size_t poisson(double mean) {
    std::size_t total = 0;
    while (mean > 0.0) {
      double m = std::min(mean, 30.0);
      mean -= m;
      double limit = std::exp(-m), prod = uniform();
      while (prod > limit) {
        ++total;
        prod *= uniform();
      }
    }
    return total;
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::array<std::array<std::string_view, 8>, kItemCount> kKeywords = {{
    {"products", "customers", "competition", "employees", "segments", "suppliers", "manufacturing", "markets"},
    {"risks", "adversely", "uncertainty", "volatility", "failure", "disruption", "dependence", "downturn"},
    {"comments", "staff", "unresolved", "written", "received", "commission", "none", "periodic"},
    {"cybersecurity", "threats", "incidents", "oversight", "security", "breach", "monitoring", "attacks"},
    {"properties", "facilities", "square", "feet", "leased", "owned", "headquarters", "warehouse"},
    {"proceedings", "lawsuit", "claims", "court", "plaintiffs", "settlement", "damages", "alleged"},
    {"mine", "safety", "violations", "applicable", "dodd-frank", "exhibit", "disclosures", "mining"},
    {"stockholders", "dividends", "repurchases", "shares", "holders", "exchange", "stock", "price"},
    {"selected", "five", "years", "historical", "summary", "data", "comparability", "reserved"},
    {"revenue", "liquidity", "operations", "results", "increase", "compared", "capital", "outlook"},
    {"interest", "rate", "exposure", "currency", "hedging", "sensitivity", "derivative", "basis"},
    {"balance", "sheet", "consolidated", "statements", "notes", "auditors", "assets", "liabilities"},
    {"changes", "disagreements", "accountants", "none", "dismissed", "engaged", "reportable", "former"},
    {"controls", "procedures", "effectiveness", "internal", "evaluation", "assessment", "framework", "material"},
    {"other", "information", "none", "trading", "arrangements", "adopted", "terminated", "quarter"},
    {"directors", "officers", "governance", "ethics", "board", "committee", "nominees", "code"},
    {"compensation", "executive", "salary", "bonus", "awards", "incentive", "equity", "pay"},
    {"ownership", "beneficial", "owners", "authorized", "plans", "outstanding", "percent", "holdings"},
    {"relationships", "transactions", "related", "independence", "director", "persons", "approved", "policies"},
    {"fees", "accountant", "audit", "services", "principal", "tax", "pre-approval", "billed"},
    {"exhibits", "schedules", "filed", "incorporated", "reference", "agreement", "amended", "certification"},
    {"summary", "optional", "none", "provided", "elected", "registrant", "omitted", "form"},
}};

constexpr std::array<std::string_view, 24> kFiller = {
    "the",      "company",  "our",     "during",     "fiscal",   "year",   "we",       "may",
    "including", "certain", "such",    "which",      "related",  "to",     "of",       "and",
    "in",       "for",      "period",  "significant", "expected", "based", "addition", "other"};

constexpr std::array<std::string_view, 10> kNameParts = {"Acme",    "Northgate", "Bluewater", "Harbor", "Summit",
                                                         "Redwood", "Lakeshore", "Pioneer",   "Granite", "Vista"};
constexpr std::array<std::string_view, 5> kNameSuffix = {"Holdings, Inc.", "Corporation", "Group, Inc.",
                                                         "Industries, Inc.", "Technologies Corp."};
constexpr std::array<std::string_view, 6> kPeople = {"Jane R. Whitfield", "Marcus Delgado", "Priya Natarajan",
                                                     "Thomas K. Brennan", "Alicia Moreno",  "David Okafor"};

const char* roman(int part) {
  static constexpr const char* kRoman[] = {"", "I", "II", "III", "IV"};
  return kRoman[part];
}

int part_of(Item item) {
  if (item_before(item, Item::k5)) return 1;
  if (item_before(item, Item::k10)) return 2;
  if (item_before(item, Item::k15)) return 3;
  return 4;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string title_for(Item item, Sampler& rng) {
  if (rng.chance(0.25)) {
    switch (item) {
      case Item::k4:
        return "Submission of Matters to a Vote of Security Holders";
      case Item::k5:
        return "Market for Registrant's Common Stock and Related Stockholder Matters";
      case Item::k6:
        return "[Reserved]";
      case Item::k9:
        return "Changes in and Disagreements with Independent Auditors on Accounting and Financial Disclosure";
      case Item::k10:
        return "Directors and Executive Officers of the Registrant";
      case Item::k15:
        return "Exhibits, Financial Statement Schedules and Reports on Form 8-K";
      default:
        break;
    }
  }
  return std::string(canonical_title(item));
}

/// Heading styles: 0 "ITEM 1. BUSINESS", 1 "Item 1. Business", 2 "Item 1: Business",
/// 3 "ITEM 1 - BUSINESS", 4 "Item 1 Business".
std::string heading(Item item, int style, const std::string& title) {
  std::string n(to_string(item));
  switch (style) {
    case 0:
      return "ITEM " + n + ". " + upper(title);
    case 1:
      return "Item " + n + ". " + title;
    case 2:
      return "Item " + n + ": " + title;
    case 3:
      return "ITEM " + n + " - " + upper(title);
    default:
      return "Item " + n + " " + title;
  }
}

std::string prose(Item item, Sampler& rng) {
  const auto& kw = kKeywords[canonical_index(item)];
  std::size_t n = rng.between(8, 22);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string_view w = rng.chance(0.45) ? rng.pick(kw) : rng.pick(kFiller);
    if (i) out += ' ';
    if (i == 0) {
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      out += w.substr(1);
    } else {
      out += w;
    }
  }
  if (rng.chance(0.04)) {
    // In-text cross reference, never at the start of a line.
    out += " as described in Item " + std::string(to_string(kAllItems[rng.below(kItemCount)]));
  }
  out += '.';
  return out;
}

std::string short_body(Sampler& rng) {
  static constexpr std::array<std::string_view, 3> kShort = {"None.", "Not applicable.", "There is nothing to report."};
  return std::string(rng.pick(kShort));
}

struct Builder {
  AnnotatedDocument doc;
  void add(std::string text, LineLabel label) {
    doc.lines.push_back({doc.lines.size(), std::move(text)});
    doc.labels.push_back(label);
  }
};

}  // namespace

AnnotatedDocument generate_document(const SynthSpec& spec, std::size_t index) {
  const std::size_t global = spec.first_index + index;
  Sampler rng(splitmix64(spec.seed ^ splitmix64(global)));
  char id[48];
  std::snprintf(id, sizeof id, "synth-%llu-%06zu", static_cast<unsigned long long>(spec.seed), global);

  std::array<bool, kItemCount> included{};
  std::array<std::size_t, kItemCount> length{};
  for (std::size_t k = 0; k < kItemCount; ++k) {
    included[k] = rng.chance(spec.inclusion[k]);
    length[k] = 2 + rng.poisson(spec.mean_item_lines[k] - 2.0);
  }
  const std::string company = std::string(rng.pick(kNameParts)) + " " + std::string(rng.pick(kNameSuffix));
  const int year = 2001 + static_cast<int>(rng.below(22));
  const int style = static_cast<int>(rng.below(5));

  Builder b;
  b.doc.doc_id = id;

  // Cover page.
  b.add("UNITED STATES", LineLabel::outside());
  b.add("SECURITIES AND EXCHANGE COMMISSION", LineLabel::outside());
  if (rng.chance(0.7)) b.add("Washington, D.C. 20549", LineLabel::outside());
  b.add("FORM 10-K", LineLabel::outside());
  b.add("ANNUAL REPORT PURSUANT TO SECTION 13 OR 15(d) OF THE SECURITIES EXCHANGE ACT OF 1934",
        LineLabel::outside());
  b.add("For the fiscal year ended December 31, " + std::to_string(year), LineLabel::outside());
  b.add(upper(company), LineLabel::outside());
  if (rng.chance(0.6)) b.add("(Exact name of registrant as specified in its charter)", LineLabel::outside());
  if (rng.chance(0.5)) {
    b.add("Indicate by check mark whether the registrant is a well-known seasoned issuer", LineLabel::outside());
  }

  // Table of contents.
  if (rng.chance(spec.toc_probability)) {
    b.add(rng.chance(0.5) ? "TABLE OF CONTENTS" : "Table of Contents", LineLabel::outside());
    int part = 0;
    int page = 3;
    const bool with_pages = rng.chance(0.6);
    // "ITEM 2 - PROPERTIES 9" is mostly non-alphabetic and would not survive filtering
    const int toc_style = (style == 3 && with_pages) ? 0 : style;
    for (Item item : kAllItems) {
      if (!included[canonical_index(item)]) continue;
      if (part_of(item) != part) {
        part = part_of(item);
        b.add(std::string("PART ") + roman(part), LineLabel::outside());
      }
      std::string line = heading(item, toc_style, std::string(canonical_title(item)));
      if (with_pages) line += " " + std::to_string(page);
      page += 1 + static_cast<int>(length[canonical_index(item)] / 8);
      b.add(std::move(line), LineLabel::outside());
    }
  }

  // Items.
  int part = 0;
  std::optional<Item> previous;
  for (Item item : kAllItems) {
    const std::size_t k = canonical_index(item);
    if (!included[k]) continue;
    if (part_of(item) != part) {
      part = part_of(item);
      std::string part_line = std::string("PART ") + roman(part);
      if (!previous) {
        b.add(part_line, LineLabel::outside());
      } else if (length[canonical_index(*previous)] >= 3) {
        // The previous item's last body line becomes the part divider.
        b.doc.lines.back().text = part_line;
      }
    }
    b.add(heading(item, rng.chance(0.9) ? style : static_cast<int>(rng.below(5)), title_for(item, rng)),
          LineLabel::begin(item));
    const bool terse = length[k] == 2 && rng.chance(0.5);
    for (std::size_t i = 1; i < length[k]; ++i) {
      std::string text;
      if (terse) {
        text = short_body(rng);
      } else if (rng.chance(spec.noise_rate)) {
        text = rng.chance(0.5) ? "Table of Contents" : company + " " + std::to_string(year) + " Annual Report";
      } else {
        text = prose(item, rng);
      }
      b.add(std::move(text), LineLabel::inside(item));
    }
    previous = item;
  }

  // Signatures.
  b.add("SIGNATURES", LineLabel::outside());
  b.add("Pursuant to the requirements of Section 13 or 15(d) of the Securities Exchange Act of 1934, the "
        "registrant has duly caused this report to be signed on its behalf",
        LineLabel::outside());
  std::string person(rng.pick(kPeople));
  b.add("/s/ " + person, LineLabel::outside());
  b.add(person, LineLabel::outside());
  b.add(rng.chance(0.5) ? "Chief Executive Officer" : "Chief Financial Officer", LineLabel::outside());
  return std::move(b.doc);
}

std::vector<AnnotatedDocument> generate_corpus(const SynthSpec& spec) {
  spec.validate();
  std::vector<AnnotatedDocument> docs;
  docs.reserve(spec.n_docs);
  for (std::size_t i = 0; i < spec.n_docs; ++i) docs.push_back(generate_document(spec, i));
  return docs;
}

EmbeddingFile embed_corpus(std::span<const AnnotatedDocument> docs, std::size_t dim) {
  EmbeddingFile file;
  file.dim = static_cast<std::uint32_t>(dim);
  file.encoder = "pseudo-hash";
  for (const auto& d : docs) file.docs.push_back(embed_document(d.doc_id, d.lines, dim));
  return file;
}

}  // namespace itemseg
