#include "itemseg/items.hpp"

#include <cctype>
#include <string>

namespace itemseg {

namespace {

constexpr std::array<std::string_view, kItemCount> kNames = {
    "1", "1A", "1B", "1C", "2", "3", "4", "5", "6", "7", "7A",
    "8", "9", "9A", "9B", "10", "11", "12", "13", "14", "15", "16",
};

constexpr std::array<std::string_view, kItemCount> kTitles = {
    "Business",
    "Risk Factors",
    "Unresolved Staff Comments",
    "Cybersecurity",
    "Properties",
    "Legal Proceedings",
    "Mine Safety Disclosures",
    "Market for Registrant's Common Equity, Related Stockholder Matters and Issuer Purchases of Equity Securities",
    "Selected Financial Data",
    "Management's Discussion and Analysis of Financial Condition and Results of Operations",
    "Quantitative and Qualitative Disclosures About Market Risk",
    "Financial Statements and Supplementary Data",
    "Changes in and Disagreements with Accountants on Accounting and Financial Disclosure",
    "Controls and Procedures",
    "Other Information",
    "Directors, Executive Officers and Corporate Governance",
    "Executive Compensation",
    "Security Ownership of Certain Beneficial Owners and Management and Related Stockholder Matters",
    "Certain Relationships and Related Transactions, and Director Independence",
    "Principal Accountant Fees and Services",
    "Exhibits and Financial Statement Schedules",
    "Form 10-K Summary",
};

}  // namespace

std::string_view to_string(Item item) { return kNames[canonical_index(item)]; }

std::string_view canonical_title(Item item) { return kTitles[canonical_index(item)]; }

std::optional<Item> parse_item(std::string_view text) {
  if (text.empty() || text.size() > 3) return std::nullopt;
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kItemCount; ++i) {
    if (kNames[i] == upper) return kAllItems[i];
  }
  return std::nullopt;
}

}  // namespace itemseg
