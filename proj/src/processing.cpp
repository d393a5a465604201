#include "cola/processing.hpp"

#include "cola/errors.hpp"
#include "cola/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cola {

FormatPolicy parse_format_policy(std::string_view s) {
    if (s == "passthrough") return FormatPolicy::passthrough;
    if (s == "wrap-qa" || s == "wrap_qa") return FormatPolicy::wrap_qa;
    throw ArgumentError("unknown format policy '" + std::string(s) + "' (expected passthrough or wrap-qa)");
}

std::string_view to_string(FormatPolicy p) {
    return p == FormatPolicy::wrap_qa ? "wrap-qa" : "passthrough";
}

Tier tier_of(double difficulty) {
    if (difficulty < 1.0 / 3.0) return Tier::easy;
    if (difficulty < 2.0 / 3.0) return Tier::medium;
    return Tier::hard;
}

void validate(const ProcessingConfig & cfg) {
    if (cfg.target_length > 0 && cfg.min_length > cfg.target_length) {
        throw ValidationError("min_length must not exceed target_length");
    }
    if (cfg.vocab_size == 0) {
        throw ValidationError("vocab_size must be positive");
    }
    if (cfg.difficulty_mix) {
        double sum = 0.0;
        for (double w : *cfg.difficulty_mix) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw ValidationError("difficulty_mix weights must be non-negative");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ValidationError("difficulty_mix must sum to 1");
        }
    }
}

Dataset chunk_to_length(const Dataset & d, const ProcessingConfig & cfg) {
    if (d.samples.empty()) {
        throw ArgumentError("chunk_to_length: empty dataset");
    }
    const std::size_t T = cfg.target_length;
    if (T == 0) {
        throw ArgumentError("chunk_to_length: target_length must be positive");
    }
    std::vector<std::uint32_t> stream;
    std::vector<std::size_t> starts; // first stream position of each sample
    stream.reserve(d.total_tokens() + d.samples.size());
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        if (i > 0) {
            stream.push_back(k_delimiter_token);
        }
        starts.push_back(stream.size());
        const auto & t = d.samples[i].tokens;
        stream.insert(stream.end(), t.begin(), t.end());
    }
    const std::size_t total = stream.size();
    if (total < T) {
        throw InsufficientDataError("chunk_to_length: " + std::to_string(total) + " tokens < target_length " +
                                    std::to_string(T));
    }
    const std::size_t m = total / T;
    const std::size_t slack = total - m * T;

    CounterRng rng(cfg.seed);
    std::vector<std::size_t> gaps(m);
    for (auto & g : gaps) {
        g = static_cast<std::size_t>(rng.below(slack + 1));
    }
    std::sort(gaps.begin(), gaps.end());

    Dataset out;
    out.name = d.name;
    out.samples.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t begin = k * T + gaps[k];
        // Sample owning `begin`: last start <= begin (a delimiter belongs to the sample before it).
        const auto it = std::upper_bound(starts.begin(), starts.end(), begin);
        const std::size_t src = static_cast<std::size_t>(std::distance(starts.begin(), it)) - 1;
        const Sample & from = d.samples[src];
        Sample s;
        s.id = from.id + "#" + std::to_string(k);
        s.tokens.assign(stream.begin() + static_cast<std::ptrdiff_t>(begin),
                        stream.begin() + static_cast<std::ptrdiff_t>(begin + T));
        s.domain = from.domain;
        s.language = from.language;
        s.difficulty = from.difficulty;
        s.format = from.format;
        out.samples.push_back(std::move(s));
    }
    return out;
}

Dataset filter_min_length(const Dataset & d, const ProcessingConfig & cfg) {
    Dataset out;
    out.name = d.name;
    for (const auto & s : d.samples) {
        if (s.tokens.size() >= cfg.min_length) {
            out.samples.push_back(s);
        }
    }
    return out;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    for (std::size_t i = 0; i + 1 < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '?' || c == '!') && text[i + 1] == ' ') {
            auto s = trim(text.substr(begin, i + 1 - begin));
            if (!s.empty()) {
                out.push_back(std::move(s));
            }
            begin = i + 2;
        }
    }
    if (begin < text.size()) {
        auto s = trim(text.substr(begin));
        if (!s.empty()) {
            out.push_back(std::move(s));
        }
    }
    return out;
}

Sample wrap_format(const Sample & s, FormatPolicy policy, std::uint32_t vocab_size) {
    if (policy == FormatPolicy::passthrough || s.format == SampleFormat::qa_erc) {
        return s;
    }
    const auto sentences = split_sentences(s.text);
    if (sentences.empty()) {
        throw ArgumentError("wrap_format: sample '" + s.id + "' has empty text");
    }
    std::string middle;
    for (std::size_t i = 1; i + 1 < sentences.size(); ++i) {
        if (!middle.empty()) {
            middle += ' ';
        }
        middle += sentences[i];
    }
    Sample out = s;
    out.text = "Question: " + sentences.front() + "\nReasoning: " + middle + "\nAnswer: " + sentences.back();
    out.format = SampleFormat::qa_erc;
    out.tokens = fallback_tokenize(out.text, vocab_size);
    return out;
}

std::array<std::size_t, 3> largest_remainder(const TierMix & weights, std::size_t count) {
    const double total_w = weights[0] + weights[1] + weights[2];
    std::array<std::size_t, 3> n{};
    if (!(total_w > 0.0)) {
        return n;
    }
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (std::size_t t = 0; t < 3; ++t) {
        const double exact = static_cast<double>(count) * weights[t] / total_w;
        n[t] = static_cast<std::size_t>(std::floor(exact));
        rem[t] = exact - static_cast<double>(n[t]);
        assigned += n[t];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t i = 0; assigned < count; i = (i + 1) % 3) {
        if (weights[order[i]] > 0.0) {
            ++n[order[i]];
            ++assigned;
        }
    }
    return n;
}

Dataset stratified_mix(const Dataset & d, const ProcessingConfig & cfg, std::size_t count) {
    if (!cfg.difficulty_mix) {
        throw ArgumentError("stratified_mix: difficulty_mix is required");
    }
    validate(cfg);
    if (count == 0) {
        throw ArgumentError("stratified_mix: count must be positive");
    }
    std::array<std::vector<std::size_t>, 3> by_tier;
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        const auto & s = d.samples[i];
        if (!s.difficulty) {
            throw ValidationError("stratified_mix: sample '" + s.id + "' has no difficulty");
        }
        by_tier[static_cast<std::size_t>(tier_of(*s.difficulty))].push_back(i);
    }
    if (count > d.samples.size()) {
        throw InsufficientDataError("stratified_mix: count " + std::to_string(count) + " exceeds " +
                                    std::to_string(d.samples.size()) + " samples");
    }

    const TierMix & mix = *cfg.difficulty_mix;
    auto target = largest_remainder(mix, count);
    for (;;) {
        std::size_t deficit = 0;
        std::array<std::size_t, 3> spare{};
        for (std::size_t t = 0; t < 3; ++t) {
            const std::size_t avail = by_tier[t].size();
            if (target[t] > avail) {
                deficit += target[t] - avail;
                target[t] = avail;
            }
            spare[t] = avail - target[t];
        }
        if (deficit == 0) {
            break;
        }
        TierMix w{};
        for (std::size_t t = 0; t < 3; ++t) {
            w[t] = spare[t] > 0 ? mix[t] : 0.0;
        }
        if (!(w[0] + w[1] + w[2] > 0.0)) {
            for (std::size_t t = 0; t < 3; ++t) {
                w[t] = static_cast<double>(spare[t]);
            }
        }
        const auto extra = largest_remainder(w, deficit);
        for (std::size_t t = 0; t < 3; ++t) {
            target[t] += extra[t];
        }
    }

    CounterRng rng(cfg.seed);
    std::vector<std::size_t> picked;
    picked.reserve(count);
    for (std::size_t t = 0; t < 3; ++t) {
        for (auto j : sample_without_replacement(by_tier[t].size(), target[t], rng)) {
            picked.push_back(by_tier[t][j]);
        }
    }
    std::sort(picked.begin(), picked.end());
    Dataset out;
    out.name = d.name;
    for (auto i : picked) {
        out.samples.push_back(d.samples[i]);
    }
    return out;
}

Dataset process_dataset(const Dataset & d, const ProcessingConfig & cfg, std::optional<std::size_t> count) {
    validate(cfg);
    Dataset cur = filter_min_length(with_fallback_tokens(d, cfg.vocab_size), cfg);
    for (auto & s : cur.samples) {
        s = wrap_format(s, cfg.format_policy, cfg.vocab_size);
    }
    if (count) {
        ProcessingConfig mix_cfg = cfg;
        mix_cfg.seed = derive_seed(cfg.seed, "mix");
        if (!mix_cfg.difficulty_mix) {
            throw ArgumentError("process: a sample count requires a difficulty mix");
        }
        cur = stratified_mix(cur, mix_cfg, *count);
    }
    if (cfg.target_length > 0) {
        if (cur.samples.empty()) {
            throw InsufficientDataError("process: no samples left to chunk after filtering");
        }
        ProcessingConfig chunk_cfg = cfg;
        chunk_cfg.seed = derive_seed(cfg.seed, "chunk");
        cur = chunk_to_length(cur, chunk_cfg);
    }
    return cur;
}

} // namespace cola
