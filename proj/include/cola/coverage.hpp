#pragma once

#include "cola/data_model.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cola {

// Maps text to a unit-norm vector. Implementations must be pure.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<double> embed(std::string_view text) const = 0;
};

// Feature-hashed bag of words: each word of split_words() adds +-1 at
// bucket fnv1a64(word) % dim, sign from bit 63 of the same hash; the sum is
// L2-normalized. Texts without words embed to the zero vector.
class HashingEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashingEmbeddingProvider(std::size_t dim = 256);
    std::string name() const override { return "hashing-bow"; }
    std::size_t dim() const override { return dim_; }
    std::vector<double> embed(std::string_view text) const override;

private:
    std::size_t dim_;
};

// How the KL term enters the coverage score.
enum class KlMode {
    exp_neg, // (1 - alpha) * exp(-kl): both terms are similarities
    raw,     // (1 - alpha) * kl: literal additive form
};

enum class EmbSimMode {
    centroid, // cosine of the two normalized mean embeddings
    pairwise, // mean cosine over all cross pairs
};

KlMode parse_kl_mode(std::string_view s);
std::string_view to_string(KlMode m);
EmbSimMode parse_embsim_mode(std::string_view s);
std::string_view to_string(EmbSimMode m);

// KL(p' || q') with p' = (p + eps) / (1 + n eps), likewise q'.
double kl_divergence(const std::vector<double> & p, const std::vector<double> & q, double epsilon = 1e-9);

double emb_sim(const Dataset & s, const Dataset & reference, const EmbeddingProvider & provider,
               EmbSimMode mode = EmbSimMode::centroid);

struct CoverageScore {
    double emb_sim = 0.0;
    double kl = 0.0;
    double alpha = 0.6;
    double combined = 0.0;
    KlMode kl_mode = KlMode::exp_neg;
};

// Recomputes `combined` from the other fields.
double combine(double emb_sim, double kl, double alpha, KlMode mode);

struct CoverageOptions {
    std::uint32_t vocab_size = 32000;
    double alpha = 0.6;
    double epsilon = 1e-9;
    KlMode kl_mode = KlMode::exp_neg;
    EmbSimMode embsim_mode = EmbSimMode::centroid;
};

// Both datasets must carry tokens (see with_fallback_tokens).
CoverageScore coverage(const Dataset & s, const CapabilitySpec & cap, const EmbeddingProvider & provider,
                       const CoverageOptions & opts = {});

struct DatasetPick {
    std::size_t pool_index = 0;
    std::string name;
    double marginal_gain = 0.0;
    double objective = 0.0; // weighted coverage of the union after this pick
};

// Samples of every dataset in order, concatenated; the name joins the parts with '+'.
Dataset concat_datasets(const std::vector<const Dataset *> & parts);

// Greedy forward selection of `budget` datasets maximizing
// sum_c w_c * coverage(union, c). Ties go to the earlier pool entry.
std::vector<DatasetPick> select_datasets(const std::vector<Dataset> & pool, const std::vector<CapabilitySpec> & caps,
                                         std::size_t budget, const EmbeddingProvider & provider,
                                         const CoverageOptions & opts = {});

// Weighted objective for an explicit subset (used by the greedy loop and by tests).
double weighted_coverage(const std::vector<const Dataset *> & subset, const std::vector<CapabilitySpec> & caps,
                         const EmbeddingProvider & provider, const CoverageOptions & opts);

} // namespace cola
