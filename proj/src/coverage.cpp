#include "cola/coverage.hpp"

#include "cola/errors.hpp"
#include "cola/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cola {

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) {
        throw ArgumentError("embedding dim must be positive");
    }
}

std::vector<double> HashingEmbeddingProvider::embed(std::string_view text) const {
    std::vector<double> v(dim_, 0.0);
    for (const auto & w : split_words(text)) {
        const std::uint64_t h = fnv1a64(w);
        v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
    }
    double norm2 = 0.0;
    for (double x : v) {
        norm2 += x * x;
    }
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double & x : v) {
            x *= inv;
        }
    }
    return v;
}

KlMode parse_kl_mode(std::string_view s) {
    if (s == "exp-neg" || s == "exp_neg") return KlMode::exp_neg;
    if (s == "raw") return KlMode::raw;
    throw ArgumentError("unknown kl mode '" + std::string(s) + "' (expected exp-neg or raw)");
}

std::string_view to_string(KlMode m) {
    return m == KlMode::raw ? "raw" : "exp-neg";
}

EmbSimMode parse_embsim_mode(std::string_view s) {
    if (s == "centroid") return EmbSimMode::centroid;
    if (s == "pairwise") return EmbSimMode::pairwise;
    throw ArgumentError("unknown embedding similarity mode '" + std::string(s) + "'");
}

std::string_view to_string(EmbSimMode m) {
    return m == EmbSimMode::pairwise ? "pairwise" : "centroid";
}

double kl_divergence(const std::vector<double> & p, const std::vector<double> & q, double epsilon) {
    if (p.size() != q.size()) {
        throw ShapeError("kl_divergence: length mismatch (" + std::to_string(p.size()) + " vs " +
                         std::to_string(q.size()) + ")");
    }
    if (!(epsilon > 0.0)) {
        throw ArgumentError("kl_divergence: epsilon must be > 0");
    }
    if (p.empty()) {
        throw ShapeError("kl_divergence: empty distributions");
    }
    const double n = static_cast<double>(p.size());
    const double p_norm = std::accumulate(p.begin(), p.end(), 0.0) + n * epsilon;
    const double q_norm = std::accumulate(q.begin(), q.end(), 0.0) + n * epsilon;
    double kl = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
        const double ps = (p[t] + epsilon) / p_norm;
        const double qs = (q[t] + epsilon) / q_norm;
        kl += ps * std::log(ps / qs);
    }
    return std::max(kl, 0.0);
}

namespace {

// Per-sample embeddings in lexicographic text order, so that anything
// accumulated from them does not depend on sample order.
std::vector<std::vector<double>> sorted_embeddings(const Dataset & d, const EmbeddingProvider & provider) {
    std::vector<const std::string *> texts;
    texts.reserve(d.samples.size());
    for (const auto & s : d.samples) {
        texts.push_back(&s.text);
    }
    std::sort(texts.begin(), texts.end(), [](auto * a, auto * b) { return *a < *b; });
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (auto * t : texts) {
        auto e = provider.embed(*t);
        if (e.size() != provider.dim()) {
            throw ShapeError("embedding provider '" + provider.name() + "' returned wrong dimension");
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<double> normalized_mean(const std::vector<std::vector<double>> & embs, const std::string & name) {
    std::vector<double> m(embs.front().size(), 0.0);
    for (const auto & e : embs) {
        for (std::size_t k = 0; k < m.size(); ++k) {
            m[k] += e[k];
        }
    }
    double norm2 = 0.0;
    for (double x : m) {
        norm2 += x * x;
    }
    if (!(norm2 > 0.0)) {
        throw DegenerateEmbeddingError("dataset '" + name + "' has a zero mean embedding");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double & x : m) {
        x *= inv;
    }
    return m;
}

} // namespace

double emb_sim(const Dataset & s, const Dataset & reference, const EmbeddingProvider & provider, EmbSimMode mode) {
    if (s.samples.empty() || reference.samples.empty()) {
        throw ArgumentError("emb_sim: datasets must be nonempty");
    }
    const auto es = sorted_embeddings(s, provider);
    const auto er = sorted_embeddings(reference, provider);
    if (mode == EmbSimMode::pairwise) {
        double total = 0.0;
        for (const auto & a : es) {
            for (const auto & b : er) {
                total += std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
            }
        }
        const double sim = total / (static_cast<double>(es.size()) * static_cast<double>(er.size()));
        return std::clamp(sim, -1.0, 1.0);
    }
    const auto ms = normalized_mean(es, s.name);
    const auto mr = normalized_mean(er, reference.name);
    if (ms == mr) {
        return 1.0;
    }
    const double cos = std::inner_product(ms.begin(), ms.end(), mr.begin(), 0.0);
    return std::clamp(cos, -1.0, 1.0);
}

double combine(double emb, double kl, double alpha, KlMode mode) {
    const double kl_term = mode == KlMode::exp_neg ? std::exp(-kl) : kl;
    return alpha * emb + (1.0 - alpha) * kl_term;
}

CoverageScore coverage(const Dataset & s, const CapabilitySpec & cap, const EmbeddingProvider & provider,
                       const CoverageOptions & opts) {
    if (!(opts.alpha >= 0.0 && opts.alpha <= 1.0)) {
        throw ArgumentError("coverage: alpha must lie in [0,1]");
    }
    CoverageScore score;
    score.alpha = opts.alpha;
    score.kl_mode = opts.kl_mode;
    score.emb_sim = emb_sim(s, cap.reference, provider, opts.embsim_mode);
    const auto ps = token_distribution(s, opts.vocab_size);
    const auto pr = token_distribution(cap.reference, opts.vocab_size);
    score.kl = kl_divergence(ps, pr, opts.epsilon);
    score.combined = combine(score.emb_sim, score.kl, score.alpha, score.kl_mode);
    return score;
}

Dataset concat_datasets(const std::vector<const Dataset *> & parts) {
    Dataset out;
    for (const auto * d : parts) {
        if (!out.name.empty()) {
            out.name += '+';
        }
        out.name += d->name;
        out.samples.insert(out.samples.end(), d->samples.begin(), d->samples.end());
    }
    return out;
}

double weighted_coverage(const std::vector<const Dataset *> & subset, const std::vector<CapabilitySpec> & caps,
                         const EmbeddingProvider & provider, const CoverageOptions & opts) {
    if (subset.empty()) {
        return 0.0;
    }
    const Dataset u = concat_datasets(subset);
    double total = 0.0;
    for (const auto & cap : caps) {
        if (cap.weight == 0.0) {
            continue;
        }
        total += cap.weight * coverage(u, cap, provider, opts).combined;
    }
    return total;
}

std::vector<DatasetPick> select_datasets(const std::vector<Dataset> & pool, const std::vector<CapabilitySpec> & caps,
                                         std::size_t budget, const EmbeddingProvider & provider,
                                         const CoverageOptions & opts) {
    if (pool.empty()) {
        throw ArgumentError("select_datasets: empty pool");
    }
    if (budget == 0 || budget > pool.size()) {
        throw ArgumentError("select_datasets: budget must lie in [1, " + std::to_string(pool.size()) + "]");
    }
    double weight_sum = 0.0;
    for (const auto & c : caps) {
        if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
            throw ValidationError("capability '" + c.capability + "' has a negative or non-finite weight");
        }
        weight_sum += c.weight;
    }
    if (!(weight_sum > 0.0)) {
        throw ValidationError("at least one capability weight must be positive");
    }

    std::vector<bool> taken(pool.size(), false);
    std::vector<const Dataset *> chosen;
    std::vector<DatasetPick> picks;
    double current = 0.0;
    for (std::size_t step = 0; step < budget; ++step) {
        std::size_t best = pool.size();
        double best_obj = 0.0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (taken[i]) {
                continue;
            }
            auto trial = chosen;
            trial.push_back(&pool[i]);
            const double obj = weighted_coverage(trial, caps, provider, opts);
            if (best == pool.size() || obj > best_obj) {
                best = i;
                best_obj = obj;
            }
        }
        taken[best] = true;
        chosen.push_back(&pool[best]);
        picks.push_back({best, pool[best].name, best_obj - current, best_obj});
        current = best_obj;
    }
    return picks;
}

} // namespace cola
