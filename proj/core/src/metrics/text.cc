// core/src/metrics/text.cc
#include "revoice/metrics/text.h"

#include <algorithm>
#include <cctype>
#include <vector>

#include "revoice/base/error.h"

namespace revoice::metrics {

std::string normalize_text(const std::string& s) {
  // Pass 1: lowercase, map whitespace to ' ', drop punctuation except
  // apostrophes between alphanumeric characters.
  std::string tmp;
  tmp.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isalnum(c)) {
      tmp.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      tmp.push_back(' ');
    } else if (c == '\'') {
      const bool prev_ok = !tmp.empty() && std::isalnum(static_cast<unsigned char>(tmp.back()));
      const bool next_ok = i + 1 < s.size() && std::isalnum(static_cast<unsigned char>(s[i + 1]));
      if (prev_ok && next_ok) tmp.push_back('\'');
    }
    // everything else (punctuation, non-ASCII bytes) is dropped
  }
  // Pass 2: collapse runs of spaces, trim ends.
  std::string out;
  out.reserve(tmp.size());
  for (char c : tmp) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out.push_back(c);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

int64_t edit_distance(const std::string& a, const std::string& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int64_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= m; ++j) {
      const int64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double cer(const std::string& reference, const std::string& hypothesis) {
  const std::string ref = normalize_text(reference);
  const std::string hyp = normalize_text(hypothesis);
  if (ref.empty()) throw DataError("cer: reference is empty after normalization");
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

}  // namespace revoice::metrics
