// core/include/revoice/metrics/text.h
#ifndef REVOICE_METRICS_TEXT_H_
#define REVOICE_METRICS_TEXT_H_

#include <string>

namespace revoice::metrics {

// Lowercase, collapse whitespace, strip punctuation except intra-word
// apostrophes. Idempotent, ASCII-oriented.
std::string normalize_text(const std::string& s);

// Levenshtein distance over characters (spaces count).
int64_t edit_distance(const std::string& a, const std::string& b);

// Character error rate: edit distance of normalized strings divided by
// normalized reference length. Throws if the reference normalizes to empty.
double cer(const std::string& reference, const std::string& hypothesis);

}  // namespace revoice::metrics

#endif  // REVOICE_METRICS_TEXT_H_
