#pragma once

#include "cola/data_model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cola {

enum class FormatPolicy { passthrough, wrap_qa };

FormatPolicy parse_format_policy(std::string_view s);
std::string_view to_string(FormatPolicy p);

// Difficulty tiers: easy [0, 1/3), medium [1/3, 2/3), hard [2/3, 1].
enum class Tier { easy = 0, medium = 1, hard = 2 };
Tier tier_of(double difficulty);

using TierMix = std::array<double, 3>;

struct ProcessingConfig {
    // 0 disables chunking.
    std::uint32_t target_length = 2048;
    std::uint32_t min_length = 256;
    FormatPolicy format_policy = FormatPolicy::passthrough;
    std::optional<TierMix> difficulty_mix;
    std::uint64_t seed = 0;
    // Used when wrap_qa re-derives tokens.
    std::uint32_t vocab_size = 32000;
};

void validate(const ProcessingConfig & cfg);

// Token id placed between consecutive samples when streams are concatenated.
inline constexpr std::uint32_t k_delimiter_token = 0;

// Concatenates all token streams (delimiter between samples) and cuts
// floor(total / target_length) non-overlapping windows of exactly
// target_length tokens. The leftover slack is spread over the gaps by
// sorted uniform draws. Window k is named "<src_id>#<k>" after the sample
// holding its first token and inherits that sample's metadata; its text is
// left empty because tokens cannot be mapped back to text in general.
Dataset chunk_to_length(const Dataset & d, const ProcessingConfig & cfg);

// Keeps samples with at least min_length tokens, order preserved.
Dataset filter_min_length(const Dataset & d, const ProcessingConfig & cfg);

// Splits on ". ", "? ", "! "; punctuation stays with its sentence.
std::vector<std::string> split_sentences(std::string_view text);

// wrap_qa: "Question: <first>\nReasoning: <middle sentences>\nAnswer: <last>",
// format qa_erc, tokens re-derived with the fallback tokenizer.
Sample wrap_format(const Sample & s, FormatPolicy policy, std::uint32_t vocab_size = 32000);

// Per-tier target counts by the largest-remainder method (ties to the lower tier).
std::array<std::size_t, 3> largest_remainder(const TierMix & weights, std::size_t count);

// Draws count samples split across tiers per cfg.difficulty_mix; tiers that
// run short are backfilled from the others in proportion to their mix
// weights. Output keeps the input order.
Dataset stratified_mix(const Dataset & d, const ProcessingConfig & cfg, std::size_t count);

// filter -> wrap -> (mix when count is given) -> (chunk when target_length > 0).
// Missing tokens are filled with the fallback tokenizer first.
Dataset process_dataset(const Dataset & d, const ProcessingConfig & cfg, std::optional<std::size_t> count);

} // namespace cola
