#include "happening/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace happening {

namespace {
inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
}  // namespace

std::string normalize_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  bool pending_space = false;
  for (char c : label) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view label) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : label) {
    if (is_space(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string template_label(std::string_view label) {
  std::string digitless;
  digitless.reserve(label.size());
  for (char c : label) {
    if (!is_digit(c)) digitless.push_back(c);
  }
  return normalize_label(digitless);
}

std::size_t longest_common_substring(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  // Rolling-row DP; labels are short so O(|a|*|b|) is fine.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
        best = std::max(best, cur[j]);
      } else {
        cur[j] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

double token_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::unordered_set<std::string_view> sa(a.begin(), a.end());
  std::unordered_set<std::string_view> sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& t : sa) {
    if (sb.count(t)) ++inter;
  }
  std::size_t uni = sa.size() + sb.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<int> find_label_year(std::string_view label) {
  std::size_t i = 0;
  while (i < label.size()) {
    if (!is_digit(label[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < label.size() && is_digit(label[j])) ++j;
    if (j - i == 4) {
      int year = (label[i] - '0') * 1000 + (label[i + 1] - '0') * 100 +
                 (label[i + 2] - '0') * 10 + (label[i + 3] - '0');
      if (year >= 1000 && year <= 2999) return year;
    }
    i = j;
  }
  return std::nullopt;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace happening
