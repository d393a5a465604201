#pragma once

#include "cola/data_model.hpp"

#include <cstdint>
#include <vector>

namespace cola {

// d x D Gaussian sketch. Entries are standard normals drawn row-major from
// CounterRng(seed), so (seed, d, D) regenerates the matrix bit-exactly.
struct ProjectionSpec {
    std::size_t original_dim = 0;
    std::size_t reduced_dim = 64;
    std::uint64_t seed = 0;
    Matrix matrix;
};

ProjectionSpec make_projection(std::size_t original_dim, std::size_t reduced_dim, std::uint64_t seed);

// Row i of the result is (1 / sqrt(d)) * R * a_i.
Matrix project(const ActivationMatrix & m, const ProjectionSpec & spec);
Matrix project(const Matrix & rows, const ProjectionSpec & spec);

struct KMeansConfig {
    std::size_t k = 128;
    std::size_t max_iters = 300;
    double tol = 1e-6; // relative inertia change that ends a restart
    std::size_t n_restarts = 10;
    std::uint64_t seed = 0;
};

struct KMeansResult {
    std::vector<std::size_t> assignments;
    Matrix centroids; // k x d
    double inertia = 0.0;
    std::size_t best_restart = 0;
    // Inertia after every assignment step, one sequence per restart.
    std::vector<std::vector<double>> inertia_history;
};

// Lloyd iterations from a k-means++ start, best of n_restarts by inertia
// (ties to the earlier restart). Restart r draws from
// CounterRng(derive_seed(cfg.seed, r)). Empty clusters are reseeded at the
// point farthest from its current centroid. Points are the rows of `points`.
KMeansResult kmeans(const Matrix & points, const KMeansConfig & cfg);

// Sum of squared distances of each row to the centroid it is assigned to.
double inertia_of(const Matrix & points, const std::vector<std::size_t> & assignments, const Matrix & centroids);

// Clusters already-projected rows and keeps, per non-empty cluster, the member
// closest to its centroid (ties to the lower row index).
SelectionResult select_from_projected(const std::vector<std::string> & ids, const Matrix & projected,
                                      const KMeansConfig & cfg);

SelectionResult select_representatives(const ActivationMatrix & m, const ProjectionSpec & proj,
                                       const KMeansConfig & cfg);

// Convenience: projection and clustering seeds derived from one master seed
// (stream names "projection" and "kmeans"); result.seed is the master seed.
SelectionResult select_samples(const ActivationMatrix & m, std::size_t reduced_dim, KMeansConfig cfg,
                               std::uint64_t master_seed);

} // namespace cola
