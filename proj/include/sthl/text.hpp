#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sthl::text {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ull);

/// Lowercased runs of ASCII letters and digits.
std::vector<std::string> tokens(std::string_view s);

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_space(std::string_view s);

inline constexpr std::size_t kTrigramDims = 256;

/// Hashed character-trigram counts of each token (padded with spaces),
/// unit-normalized. All zeros for text without tokens.
std::vector<double> trigram_embedding(std::string_view s, std::size_t dims = kTrigramDims);

/// Cosine of two equal-length vectors; 0 when either is zero.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace sthl::text
