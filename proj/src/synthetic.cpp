#include "cola/synthetic.hpp"

#include "cola/errors.hpp"
#include <algorithm>
#include "cola/rng.hpp"

#include <cmath>
#include <cstdio>

namespace cola {

namespace {

std::string padded_id(const char * prefix, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s-%05zu", prefix, i);
    return buf;
}

} // namespace

SyntheticData generate_synthetic(const SyntheticConfig & cfg) {
    if (cfg.n_blobs == 0 || cfg.n_candidates < cfg.n_blobs || cfg.layer_dims.empty() || cfg.spread_rank == 0) {
        throw ArgumentError("generate_synthetic: invalid configuration");
    }
    std::size_t D = 0;
    for (auto d : cfg.layer_dims) {
        D += d;
    }
    const auto Di = static_cast<Eigen::Index>(D);
    const auto rank = static_cast<Eigen::Index>(cfg.spread_rank);

    CounterRng blob_rng(derive_seed(cfg.seed, "blobs"));
    Matrix means(static_cast<Eigen::Index>(cfg.n_blobs), Di);
    std::vector<Matrix> bases;
    const double basis_std = cfg.spread_scale / std::sqrt(static_cast<double>(cfg.spread_rank));
    for (std::size_t b = 0; b < cfg.n_blobs; ++b) {
        for (Eigen::Index c = 0; c < Di; ++c) {
            means(static_cast<Eigen::Index>(b), c) = cfg.mean_scale * blob_rng.normal();
        }
        Matrix U(Di, rank);
        for (Eigen::Index r = 0; r < Di; ++r) {
            for (Eigen::Index c = 0; c < rank; ++c) {
                U(r, c) = basis_std * blob_rng.normal();
            }
        }
        bases.push_back(std::move(U));
    }

    auto draw = [&](std::size_t blob, CounterRng & rng) {
        Eigen::VectorXd z(rank);
        for (Eigen::Index c = 0; c < rank; ++c) {
            z(c) = rng.normal();
        }
        Eigen::VectorXd x = means.row(static_cast<Eigen::Index>(blob)).transpose() + bases[blob] * z;
        for (Eigen::Index c = 0; c < Di; ++c) {
            x(c) += cfg.noise_scale * rng.normal();
        }
        return x;
    };

    // Pool counts by largest remainder over geometric weights, then shuffled order.
    std::vector<double> w(cfg.n_blobs);
    double wsum = 0.0;
    for (std::size_t b = 0; b < cfg.n_blobs; ++b) {
        w[b] = std::pow(cfg.pool_decay, static_cast<double>(b));
        wsum += w[b];
    }
    std::vector<std::size_t> counts(cfg.n_blobs);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t assigned = 0;
    for (std::size_t b = 0; b < cfg.n_blobs; ++b) {
        const double exact = static_cast<double>(cfg.n_candidates) * w[b] / wsum;
        counts[b] = static_cast<std::size_t>(std::floor(exact));
        rem.emplace_back(exact - static_cast<double>(counts[b]), b);
        assigned += counts[b];
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto & a, auto & b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < cfg.n_candidates; ++i, ++assigned) {
        ++counts[rem[i % rem.size()].second];
    }
    std::vector<std::size_t> labels;
    for (std::size_t b = 0; b < cfg.n_blobs; ++b) {
        labels.insert(labels.end(), counts[b], b);
    }
    CounterRng pool_rng(derive_seed(cfg.seed, "pool"));
    const auto perm = sample_without_replacement(labels.size(), labels.size(), pool_rng);
    std::vector<std::size_t> cand_labels(labels.size());
    Matrix cand(static_cast<Eigen::Index>(labels.size()), Di);
    std::vector<std::string> cand_ids;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        cand_labels[i] = labels[perm[i]];
        cand.row(static_cast<Eigen::Index>(i)) = draw(cand_labels[i], pool_rng).transpose();
        cand_ids.push_back(padded_id("cand", i));
    }

    CounterRng eval_rng(derive_seed(cfg.seed, "eval"));
    const std::size_t n_eval = cfg.eval_per_blob * cfg.n_blobs;
    Matrix ev(static_cast<Eigen::Index>(n_eval), Di);
    std::vector<std::string> eval_ids;
    for (std::size_t i = 0; i < n_eval; ++i) {
        ev.row(static_cast<Eigen::Index>(i)) = draw(i % cfg.n_blobs, eval_rng).transpose();
        eval_ids.push_back(padded_id("eval", i));
    }

    CounterRng layer_rng(derive_seed(cfg.seed, "layers"));
    std::vector<LinearLayer> layers;
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        const auto cols = static_cast<Eigen::Index>(cfg.layer_dims[l % cfg.layer_dims.size()]);
        LinearLayer layer;
        layer.name = padded_id("layer", l);
        layer.weights.resize(static_cast<Eigen::Index>(cfg.layer_rows), cols);
        const double std_w = 1.0 / std::sqrt(static_cast<double>(cols));
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                layer.weights(r, c) = std_w * layer_rng.normal();
            }
        }
        layers.push_back(std::move(layer));
    }

    return SyntheticData{ActivationMatrix(std::move(cand_ids), cfg.layer_dims, cand),
                         ActivationMatrix(std::move(eval_ids), cfg.layer_dims, ev), std::move(layers),
                         std::move(cand_labels), std::move(means)};
}

LabeledPoints gaussian_blobs(std::size_t n_blobs, std::size_t per_blob, std::size_t dim, double separation,
                             double sigma, std::uint64_t seed) {
    CounterRng rng(seed);
    LabeledPoints out;
    const auto d = static_cast<Eigen::Index>(dim);
    out.centers.resize(static_cast<Eigen::Index>(n_blobs), d);
    // Centers on scaled simplex-like axes: blob b sits at separation * e_(b mod dim), shifted per wrap.
    for (std::size_t b = 0; b < n_blobs; ++b) {
        out.centers.row(static_cast<Eigen::Index>(b)).setZero();
        out.centers(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b % dim)) =
            separation * static_cast<double>(1 + b / dim);
    }
    out.points.resize(static_cast<Eigen::Index>(n_blobs * per_blob), d);
    for (std::size_t i = 0; i < n_blobs * per_blob; ++i) {
        const std::size_t b = i % n_blobs;
        out.labels.push_back(b);
        for (Eigen::Index c = 0; c < d; ++c) {
            out.points(static_cast<Eigen::Index>(i), c) = out.centers(static_cast<Eigen::Index>(b), c) + sigma * rng.normal();
        }
    }
    return out;
}

} // namespace cola
