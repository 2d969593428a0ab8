#pragma once
// Label and token helpers shared by the series, feature and inference code.
// Labels are stored verbatim in the graph; consumers normalize here.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace happening {

// Collapses whitespace runs to single spaces and trims the ends.
std::string normalize_label(std::string_view label);

// Whitespace tokens of the normalized label.
std::vector<std::string> tokenize(std::string_view label);

// Normalized label with all decimal digits removed. Identifies the "slot" an
// event fills across editions of a series. Idempotent.
std::string template_label(std::string_view label);

// Length of the longest common contiguous substring (bytes).
std::size_t longest_common_substring(std::string_view a, std::string_view b);

// Jaccard similarity of the two token multisets taken as sets.
double token_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

// First standalone 4-digit run in [1000, 2999]; runs adjacent to other digits
// (e.g. a 5-digit number) do not qualify.
std::optional<int> find_label_year(std::string_view label);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace happening
