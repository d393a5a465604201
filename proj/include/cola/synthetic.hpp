#pragma once

#include "cola/compression.hpp"
#include "cola/data_model.hpp"

#include <cstdint>
#include <vector>

namespace cola {

// Mixture-of-blobs activation generator used for the random-vs-curated
// comparison. Each blob has a random mean and a random low-rank spread;
// the candidate pool draws blobs with geometrically decaying frequency
// (common capabilities dominate a raw corpus) while the evaluation batch
// holds the same number of rows from every blob.
struct SyntheticConfig {
    std::size_t n_candidates = 1000;
    std::size_t eval_per_blob = 64;
    std::size_t n_blobs = 8;
    std::vector<std::uint32_t> layer_dims{128, 128, 128, 128};
    std::size_t n_layers = 16;
    std::size_t layer_rows = 64;
    double pool_decay = 0.5;     // blob b has pool weight pool_decay^b
    double mean_scale = 1.0;     // per-coordinate std of blob means
    std::size_t spread_rank = 8;
    double spread_scale = 0.5;   // per-coordinate std contributed by the low-rank spread
    double noise_scale = 0.1;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    ActivationMatrix candidates;
    ActivationMatrix eval;
    std::vector<LinearLayer> layers;
    std::vector<std::size_t> candidate_blob;
    Matrix blob_means; // n_blobs x D
};

SyntheticData generate_synthetic(const SyntheticConfig & cfg);

// Isotropic Gaussian blobs with known labels (rows of the result), for
// clustering tests: `per_blob` points around each center, std `sigma`.
struct LabeledPoints {
    Matrix points;
    std::vector<std::size_t> labels;
    Matrix centers;
};
LabeledPoints gaussian_blobs(std::size_t n_blobs, std::size_t per_blob, std::size_t dim, double separation,
                             double sigma, std::uint64_t seed);

} // namespace cola
