#include "cola/activation_selection.hpp"

#include "cola/errors.hpp"
#include "cola/parallel.hpp"
#include "cola/rng.hpp"

#include <cmath>
#include <limits>

namespace cola {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ProjectionSpec make_projection(std::size_t original_dim, std::size_t reduced_dim, std::uint64_t seed) {
    if (original_dim == 0 || reduced_dim == 0) {
        throw ArgumentError("projection dimensions must be positive");
    }
    if (reduced_dim > original_dim) {
        throw ArgumentError("reduced_dim (" + std::to_string(reduced_dim) + ") exceeds original_dim (" +
                            std::to_string(original_dim) + ")");
    }
    ProjectionSpec spec;
    spec.original_dim = original_dim;
    spec.reduced_dim = reduced_dim;
    spec.seed = seed;
    spec.matrix.resize(static_cast<Eigen::Index>(reduced_dim), static_cast<Eigen::Index>(original_dim));
    CounterRng rng(seed);
    for (Eigen::Index r = 0; r < spec.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < spec.matrix.cols(); ++c) {
            spec.matrix(r, c) = rng.normal();
        }
    }
    return spec;
}

Matrix project(const Matrix & rows, const ProjectionSpec & spec) {
    if (static_cast<std::size_t>(rows.cols()) != spec.original_dim ||
        spec.matrix.cols() != static_cast<Eigen::Index>(spec.original_dim) ||
        spec.matrix.rows() != static_cast<Eigen::Index>(spec.reduced_dim)) {
        throw ShapeError("project: input has " + std::to_string(rows.cols()) + " columns, projection expects " +
                         std::to_string(spec.original_dim));
    }
    if (!rows.allFinite()) {
        throw ValidationError("project: input contains NaN or Inf");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.reduced_dim));
    Matrix out = (rows * spec.matrix.transpose()) * scale;
    if (!out.allFinite()) {
        throw NumericalError("project: projected values overflowed");
    }
    return out;
}

Matrix project(const ActivationMatrix & m, const ProjectionSpec & spec) {
    return project(Matrix(m.data().cast<double>()), spec);
}

namespace {

double sq_dist(const double * a, const double * b, Eigen::Index d) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

struct RestartOutcome {
    std::vector<std::size_t> assign;
    RowMatrix centroids;
    double inertia = 0.0;
    std::vector<double> history;
};

class LloydRun {
public:
    LloydRun(const RowMatrix & pts, std::size_t k) : pts_(pts), n_(pts.rows()), d_(pts.cols()), k_(k) {}

    RestartOutcome run(const KMeansConfig & cfg, std::uint64_t seed) {
        CounterRng rng(seed);
        init_plus_plus(rng);
        RestartOutcome out;
        out.assign.assign(n_, 0);
        std::vector<double> dist(n_, 0.0);
        std::vector<std::size_t> prev_assign;
        for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
            assign_all(out.assign, dist);
            repair_empty(out.assign, dist);
            const double inertia = sum(dist);
            out.history.push_back(inertia);
            const bool stable = out.assign == prev_assign;
            if (stable || inertia == 0.0) {
                break;
            }
            if (out.history.size() >= 2) {
                const double prev = out.history[out.history.size() - 2];
                if (prev - inertia <= cfg.tol * prev) {
                    break;
                }
            }
            prev_assign = out.assign;
            update_means(out.assign);
        }
        // Final centroids are the member means of the final partition.
        update_means(out.assign);
        out.inertia = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            out.inertia += sq_dist(pts_.row(i).data(), cent_.row(static_cast<Eigen::Index>(out.assign[i])).data(), d_);
        }
        out.history.push_back(out.inertia);
        out.centroids = cent_;
        return out;
    }

private:
    void init_plus_plus(CounterRng & rng) {
        cent_.resize(static_cast<Eigen::Index>(k_), d_);
        std::vector<bool> chosen(n_, false);
        std::vector<double> best(n_, std::numeric_limits<double>::infinity());
        std::size_t pick = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n_)));
        for (std::size_t c = 0; c < k_; ++c) {
            if (c > 0) {
                double total = 0.0;
                for (Eigen::Index i = 0; i < n_; ++i) {
                    total += best[i];
                }
                if (total > 0.0) {
                    const double u = rng.uniform() * total;
                    double acc = 0.0;
                    pick = n_;
                    for (Eigen::Index i = 0; i < n_; ++i) {
                        if (best[i] <= 0.0) {
                            continue;
                        }
                        acc += best[i];
                        pick = static_cast<std::size_t>(i);
                        if (acc > u) {
                            break;
                        }
                    }
                } else {
                    // Every point coincides with a chosen center: take a random unchosen one.
                    std::vector<std::size_t> rest;
                    for (Eigen::Index i = 0; i < n_; ++i) {
                        if (!chosen[i]) rest.push_back(static_cast<std::size_t>(i));
                    }
                    pick = rest[rng.below(rest.size())];
                }
            }
            chosen[pick] = true;
            cent_.row(static_cast<Eigen::Index>(c)) = pts_.row(static_cast<Eigen::Index>(pick));
            for (Eigen::Index i = 0; i < n_; ++i) {
                best[i] = std::min(best[i], sq_dist(pts_.row(i).data(), cent_.row(static_cast<Eigen::Index>(c)).data(), d_));
            }
        }
    }

    void assign_all(std::vector<std::size_t> & assign, std::vector<double> & dist) const {
        for (Eigen::Index i = 0; i < n_; ++i) {
            const double * p = pts_.row(i).data();
            std::size_t arg = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k_; ++c) {
                const double dd = sq_dist(p, cent_.row(static_cast<Eigen::Index>(c)).data(), d_);
                if (dd < bestd) {
                    bestd = dd;
                    arg = c;
                }
            }
            assign[i] = arg;
            dist[i] = bestd;
        }
    }

    void repair_empty(std::vector<std::size_t> & assign, std::vector<double> & dist) {
        std::vector<std::size_t> count(k_, 0);
        for (auto a : assign) {
            ++count[a];
        }
        for (std::size_t c = 0; c < k_; ++c) {
            if (count[c] > 0) {
                continue;
            }
            std::size_t far = n_;
            for (Eigen::Index i = 0; i < n_; ++i) {
                if (count[assign[i]] < 2) {
                    continue;
                }
                if (far == static_cast<std::size_t>(n_) || dist[i] > dist[far]) {
                    far = static_cast<std::size_t>(i);
                }
            }
            if (far == static_cast<std::size_t>(n_)) {
                throw NumericalError("kmeans: cannot repair empty cluster");
            }
            --count[assign[far]];
            assign[far] = c;
            ++count[c];
            dist[far] = 0.0;
            cent_.row(static_cast<Eigen::Index>(c)) = pts_.row(static_cast<Eigen::Index>(far));
        }
    }

    void update_means(const std::vector<std::size_t> & assign) {
        RowMatrix sums = RowMatrix::Zero(static_cast<Eigen::Index>(k_), d_);
        std::vector<std::size_t> count(k_, 0);
        for (Eigen::Index i = 0; i < n_; ++i) {
            sums.row(static_cast<Eigen::Index>(assign[i])) += pts_.row(i);
            ++count[assign[i]];
        }
        for (std::size_t c = 0; c < k_; ++c) {
            if (count[c] > 0) {
                cent_.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(count[c]);
            }
        }
    }

    static double sum(const std::vector<double> & v) {
        double s = 0.0;
        for (double x : v) {
            s += x;
        }
        return s;
    }

    const RowMatrix & pts_;
    Eigen::Index n_;
    Eigen::Index d_;
    std::size_t k_;
    RowMatrix cent_;
};

} // namespace

double inertia_of(const Matrix & points, const std::vector<std::size_t> & assignments, const Matrix & centroids) {
    if (assignments.size() != static_cast<std::size_t>(points.rows()) || points.cols() != centroids.cols()) {
        throw ShapeError("inertia_of: shape mismatch");
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        s += (points.row(i) - centroids.row(static_cast<Eigen::Index>(assignments[i]))).squaredNorm();
    }
    return s;
}

KMeansResult kmeans(const Matrix & points, const KMeansConfig & cfg) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (cfg.k == 0) {
        throw ArgumentError("kmeans: k must be positive");
    }
    if (n < cfg.k) {
        throw ArgumentError("kmeans: n (" + std::to_string(n) + ") < k (" + std::to_string(cfg.k) + ")");
    }
    if (cfg.n_restarts == 0 || cfg.max_iters == 0) {
        throw ArgumentError("kmeans: n_restarts and max_iters must be positive");
    }
    if (!points.allFinite()) {
        throw ValidationError("kmeans: points contain NaN or Inf");
    }
    const RowMatrix pts = points;
    std::vector<RestartOutcome> outcomes(cfg.n_restarts);
    parallel_for(cfg.n_restarts, [&](std::size_t r) {
        LloydRun run(pts, cfg.k);
        outcomes[r] = run.run(cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < outcomes.size(); ++r) {
        if (outcomes[r].inertia < outcomes[best].inertia) {
            best = r;
        }
    }
    KMeansResult res;
    res.assignments = outcomes[best].assign;
    res.centroids = outcomes[best].centroids;
    res.inertia = outcomes[best].inertia;
    res.best_restart = best;
    for (auto & o : outcomes) {
        res.inertia_history.push_back(std::move(o.history));
    }
    return res;
}

SelectionResult select_from_projected(const std::vector<std::string> & ids, const Matrix & projected,
                                      const KMeansConfig & cfg) {
    if (ids.size() != static_cast<std::size_t>(projected.rows())) {
        throw ShapeError("select_from_projected: id count does not match rows");
    }
    auto km = kmeans(projected, cfg);
    SelectionResult out;
    out.centroids = km.centroids;
    out.inertia = km.inertia;
    out.seed = cfg.seed;
    const std::size_t k = cfg.k;
    std::vector<std::size_t> best(k, ids.size());
    std::vector<double> best_d(k, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t c = km.assignments[i];
        out.cluster_assignments[ids[i]] = c;
        const double d = (projected.row(static_cast<Eigen::Index>(i)) -
                          km.centroids.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (d < best_d[c]) {
            best_d[c] = d;
            best[c] = i;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (best[c] < ids.size()) {
            out.selected_ids.push_back(ids[best[c]]);
        }
    }
    return out;
}

SelectionResult select_representatives(const ActivationMatrix & m, const ProjectionSpec & proj,
                                       const KMeansConfig & cfg) {
    if (m.rows() < cfg.k) {
        throw ArgumentError("select_representatives: " + std::to_string(m.rows()) + " candidates < k " +
                            std::to_string(cfg.k));
    }
    return select_from_projected(m.sample_ids(), project(m, proj), cfg);
}

SelectionResult select_samples(const ActivationMatrix & m, std::size_t reduced_dim, KMeansConfig cfg,
                               std::uint64_t master_seed) {
    const auto proj = make_projection(m.cols(), reduced_dim, derive_seed(master_seed, "projection"));
    cfg.seed = derive_seed(master_seed, "kmeans");
    auto res = select_representatives(m, proj, cfg);
    res.seed = master_seed;
    return res;
}

} // namespace cola
