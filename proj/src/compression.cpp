#include "cola/compression.hpp"

#include "cola/errors.hpp"
#include "container.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cola {

void validate(const LinearLayer & layer) {
    if (layer.rows() == 0 || layer.cols() == 0) {
        throw ValidationError("layer '" + layer.name + "' is empty");
    }
    if (!layer.weights.allFinite()) {
        throw ValidationError("layer '" + layer.name + "' has NaN or Inf weights");
    }
}

void validate(const CalibrationBatch & batch) {
    if (batch.inputs.cols() < 1 || batch.inputs.rows() < 1) {
        throw ValidationError("calibration batch needs at least one position");
    }
    if (!batch.inputs.allFinite()) {
        throw ValidationError("calibration batch has NaN or Inf entries");
    }
}

namespace {

void require_compatible(const LinearLayer & layer, const CalibrationBatch & batch, const char * op) {
    if (layer.cols() != batch.inputs.rows()) {
        throw ShapeError(std::string(op) + ": layer '" + layer.name + "' expects " + std::to_string(layer.cols()) +
                         " input channels, batch has " + std::to_string(batch.inputs.rows()));
    }
}

} // namespace

double reconstruction_error(const LinearLayer & layer, const LinearLayer & compressed, const CalibrationBatch & batch) {
    if (layer.rows() != compressed.rows() || layer.cols() != compressed.cols()) {
        throw ShapeError("reconstruction_error: original and compressed shapes differ");
    }
    require_compatible(layer, batch, "reconstruction_error");
    return ((layer.weights - compressed.weights) * batch.inputs).norm();
}

std::size_t prune_count(double sparsity, std::size_t count) {
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
        throw ArgumentError("sparsity must lie in [0,1]");
    }
    const double x = sparsity * static_cast<double>(count);
    return std::min(count, static_cast<std::size_t>(std::floor(x + 1e-9)));
}

LinearLayer apply_mask(const LinearLayer & layer, const Mask & mask) {
    if (mask.rows() != layer.rows() || mask.cols() != layer.cols()) {
        throw ShapeError("apply_mask: mask shape differs from layer");
    }
    LinearLayer out = layer;
    out.weights = mask.select(Matrix::Zero(layer.rows(), layer.cols()), layer.weights);
    return out;
}

std::size_t count_pruned(const Mask & mask) {
    return static_cast<std::size_t>(mask.count());
}

Mask magnitude_mask(const LinearLayer & layer, double sparsity) {
    const auto r = layer.rows();
    const auto c = layer.cols();
    const std::size_t total = static_cast<std::size_t>(r * c);
    const std::size_t n_prune = prune_count(sparsity, total);
    // Linear index in row-major order gives (row, col) tie-breaking.
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto mag = [&](std::size_t k) {
        return std::abs(layer.weights(static_cast<Eigen::Index>(k) / c, static_cast<Eigen::Index>(k) % c));
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag(a) < mag(b); });
    Mask mask = Mask::Constant(r, c, false);
    for (std::size_t i = 0; i < n_prune; ++i) {
        const auto k = static_cast<Eigen::Index>(order[i]);
        mask(k / c, k % c) = true;
    }
    return mask;
}

LinearLayer magnitude_prune(const LinearLayer & layer, double sparsity) {
    return apply_mask(layer, magnitude_mask(layer, sparsity));
}

std::vector<double> channel_norms(const CalibrationBatch & batch) {
    std::vector<double> norms(static_cast<std::size_t>(batch.inputs.rows()));
    for (Eigen::Index j = 0; j < batch.inputs.rows(); ++j) {
        norms[static_cast<std::size_t>(j)] = batch.inputs.row(j).norm();
    }
    return norms;
}

Matrix wanda_scores(const LinearLayer & layer, const CalibrationBatch & batch) {
    require_compatible(layer, batch, "wanda_scores");
    const auto norms = channel_norms(batch);
    Matrix s = layer.weights.cwiseAbs();
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        s.col(j) *= norms[static_cast<std::size_t>(j)];
    }
    return s;
}

namespace {

// Marks the `count` lowest scores among columns [begin, begin + len) of row r.
void prune_lowest(const Matrix & scores, Eigen::Index r, Eigen::Index begin, Eigen::Index len, std::size_t count,
                  Mask & mask) {
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(len));
    std::iota(cols.begin(), cols.end(), begin);
    std::stable_sort(cols.begin(), cols.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return scores(r, a) < scores(r, b); });
    for (std::size_t i = 0; i < count; ++i) {
        mask(r, cols[i]) = true;
    }
}

} // namespace

Mask wanda_mask(const LinearLayer & layer, const CalibrationBatch & batch, const PruneTarget & target) {
    const Matrix scores = wanda_scores(layer, batch);
    const auto r = layer.rows();
    const auto c = layer.cols();
    Mask mask = Mask::Constant(r, c, false);
    if (const auto * sparsity = std::get_if<double>(&target)) {
        const std::size_t per_row = prune_count(*sparsity, static_cast<std::size_t>(c));
        for (Eigen::Index i = 0; i < r; ++i) {
            prune_lowest(scores, i, 0, c, per_row, mask);
        }
        return mask;
    }
    const auto & bp = std::get<BlockPattern>(target);
    if (bp.block_len == 0 || bp.n_zero >= bp.block_len) {
        throw ArgumentError("block pattern requires n_zero < block_len");
    }
    if (c % bp.block_len != 0) {
        throw ArgumentError("input dim " + std::to_string(c) + " is not divisible by block_len " +
                            std::to_string(bp.block_len));
    }
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index b = 0; b < c; b += bp.block_len) {
            prune_lowest(scores, i, b, bp.block_len, bp.n_zero, mask);
        }
    }
    return mask;
}

LinearLayer wanda_prune(const LinearLayer & layer, const CalibrationBatch & batch, const PruneTarget & target) {
    return apply_mask(layer, wanda_mask(layer, batch, target));
}

LinearLayer reconstruct_with_mask(const LinearLayer & layer, const CalibrationBatch & batch, const Mask & mask) {
    require_compatible(layer, batch, "reconstruct_prune");
    if (mask.rows() != layer.rows() || mask.cols() != layer.cols()) {
        throw ShapeError("reconstruct_prune: mask shape differs from layer");
    }
    const Matrix & X = batch.inputs;
    const Matrix H = X * X.transpose();
    const double lambda = 0.01 * H.diagonal().mean();
    LinearLayer out = layer;
    const auto c = layer.cols();
    for (Eigen::Index r = 0; r < layer.rows(); ++r) {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = 0; j < c; ++j) {
            if (!mask(r, j)) keep.push_back(j);
        }
        if (static_cast<Eigen::Index>(keep.size()) == c) {
            continue;
        }
        out.weights.row(r).setZero();
        if (keep.empty()) {
            continue;
        }
        const auto s = static_cast<Eigen::Index>(keep.size());
        const Eigen::VectorXd w0 = layer.weights.row(r).transpose();
        const Eigen::VectorXd hw = H * w0;
        Matrix A(s, s);
        Eigen::VectorXd b(s);
        for (Eigen::Index a = 0; a < s; ++a) {
            for (Eigen::Index e = 0; e < s; ++e) {
                A(a, e) = H(keep[a], keep[e]);
            }
            A(a, a) += lambda;
            b(a) = hw(keep[a]) + lambda * w0(keep[a]);
        }
        Eigen::LLT<Matrix> llt(A);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("reconstruct_prune: singular system for row " + std::to_string(r) + " of layer '" +
                                 layer.name + "' even after damping");
        }
        const Eigen::VectorXd w = llt.solve(b);
        if (!w.allFinite()) {
            throw NumericalError("reconstruct_prune: non-finite refit for row " + std::to_string(r));
        }
        for (Eigen::Index a = 0; a < s; ++a) {
            out.weights(r, keep[a]) = w(a);
        }
    }
    return out;
}

LinearLayer reconstruct_prune(const LinearLayer & layer, const CalibrationBatch & batch, const PruneTarget & target) {
    return reconstruct_with_mask(layer, batch, wanda_mask(layer, batch, target));
}

namespace {

Eigen::Index group_width(Eigen::Index cols, std::optional<std::uint32_t> group_size) {
    const Eigen::Index g = group_size ? static_cast<Eigen::Index>(*group_size) : cols;
    if (g <= 0 || cols % g != 0) {
        throw ArgumentError("group_size " + std::to_string(g) + " does not divide input dim " + std::to_string(cols));
    }
    return g;
}

int qmax_for(int bits) {
    if (bits < 2 || bits > 31) {
        throw ArgumentError("bits must lie in [2, 31]");
    }
    return (1 << (bits - 1)) - 1;
}

} // namespace

Matrix rtn_scales(const Matrix & weights, int bits, std::optional<std::uint32_t> group_size) {
    const int qmax = qmax_for(bits);
    const Eigen::Index g = group_width(weights.cols(), group_size);
    Matrix scales(weights.rows(), weights.cols() / g);
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
        for (Eigen::Index k = 0; k < scales.cols(); ++k) {
            scales(r, k) = weights.row(r).segment(k * g, g).cwiseAbs().maxCoeff() / qmax;
        }
    }
    return scales;
}

LinearLayer rtn_quantize(const LinearLayer & layer, int bits, std::optional<std::uint32_t> group_size) {
    const int qmax = qmax_for(bits);
    const Eigen::Index g = group_width(layer.cols(), group_size);
    const Matrix scales = rtn_scales(layer.weights, bits, group_size);
    LinearLayer out = layer;
    for (Eigen::Index r = 0; r < layer.rows(); ++r) {
        for (Eigen::Index j = 0; j < layer.cols(); ++j) {
            const double scale = scales(r, j / g);
            if (scale == 0.0) {
                out.weights(r, j) = 0.0;
                continue;
            }
            const double q = std::clamp(std::round(layer.weights(r, j) / scale), -static_cast<double>(qmax),
                                        static_cast<double>(qmax));
            out.weights(r, j) = q * scale;
        }
    }
    return out;
}

std::vector<double> activation_scales(const CalibrationBatch & batch) {
    auto s = channel_norms(batch);
    for (double & v : s) {
        v = std::max(std::sqrt(v), 1e-8);
    }
    if (std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); })) {
        std::fill(s.begin(), s.end(), 1.0);
        return s;
    }
    double log_mean = 0.0;
    for (double v : s) {
        log_mean += std::log(v);
    }
    log_mean /= static_cast<double>(s.size());
    const double gm = std::exp(log_mean);
    for (double & v : s) {
        v /= gm;
    }
    return s;
}

LinearLayer scaled_quantize(const LinearLayer & layer, const CalibrationBatch & batch, int bits,
                            std::optional<std::uint32_t> group_size) {
    require_compatible(layer, batch, "scaled_quantize");
    const auto s = activation_scales(batch);
    LinearLayer scaled = layer;
    for (Eigen::Index j = 0; j < layer.cols(); ++j) {
        scaled.weights.col(j) *= s[static_cast<std::size_t>(j)];
    }
    LinearLayer out = rtn_quantize(scaled, bits, group_size);
    for (Eigen::Index j = 0; j < layer.cols(); ++j) {
        out.weights.col(j) /= s[static_cast<std::size_t>(j)];
    }
    out.name = layer.name;
    return out;
}

LinearLayer compress(const LinearLayer & layer, const CalibrationBatch & batch, const CompressionScheme & scheme) {
    validate(scheme);
    auto target = [&]() -> PruneTarget {
        if (scheme.block_pattern) return *scheme.block_pattern;
        return *scheme.sparsity;
    };
    switch (scheme.kind) {
        case SchemeKind::magnitude_prune: return magnitude_prune(layer, *scheme.sparsity);
        case SchemeKind::wanda_prune: return wanda_prune(layer, batch, target());
        case SchemeKind::reconstruct_prune: return reconstruct_prune(layer, batch, target());
        case SchemeKind::rtn_quant: return rtn_quantize(layer, *scheme.bits, scheme.group_size);
        case SchemeKind::scaled_quant: return scaled_quantize(layer, batch, *scheme.bits, scheme.group_size);
    }
    throw ArgumentError("unknown compression scheme");
}

std::size_t segment_for_layer(const ActivationMatrix & store, std::size_t layer_index, const LinearLayer & layer) {
    const std::size_t seg = layer_index % store.num_layers();
    if (store.layer_dims()[seg] != static_cast<std::uint32_t>(layer.cols())) {
        throw ShapeError("layer '" + layer.name + "' has " + std::to_string(layer.cols()) +
                         " inputs but activation segment " + std::to_string(seg) + " has width " +
                         std::to_string(store.layer_dims()[seg]));
    }
    return seg;
}

std::vector<double> evaluate_calibration(const std::vector<LinearLayer> & layers, const ActivationMatrix & calib,
                                         const std::vector<std::string> & selection, const CompressionScheme & scheme,
                                         const ActivationMatrix & eval) {
    if (selection.empty()) {
        throw ArgumentError("evaluate_calibration: empty selection");
    }
    std::vector<std::size_t> rows;
    rows.reserve(selection.size());
    for (const auto & id : selection) {
        const auto r = calib.find(id);
        if (!r) {
            throw LookupError("selected sample '" + id + "' not found in activation store");
        }
        rows.push_back(*r);
    }
    std::vector<std::size_t> eval_rows(eval.rows());
    std::iota(eval_rows.begin(), eval_rows.end(), std::size_t{0});
    std::vector<double> errors;
    errors.reserve(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto & layer = layers[l];
        validate(layer);
        const CalibrationBatch cal{calib.layer_columns(segment_for_layer(calib, l, layer), rows)};
        const CalibrationBatch ev{eval.layer_columns(segment_for_layer(eval, l, layer), eval_rows)};
        const LinearLayer compressed = compress(layer, cal, scheme);
        errors.push_back(reconstruction_error(layer, compressed, ev));
    }
    return errors;
}

std::string encode_layer_bank(const std::vector<LinearLayer> & layers) {
    std::vector<std::uint32_t> dims;
    std::vector<std::vector<float>> payloads;
    for (const auto & l : layers) {
        validate(l);
        dims.push_back(static_cast<std::uint32_t>(l.rows()));
        dims.push_back(static_cast<std::uint32_t>(l.cols()));
        std::vector<float> p;
        p.reserve(static_cast<std::size_t>(l.weights.size()));
        for (Eigen::Index r = 0; r < l.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.cols(); ++c) {
                p.push_back(static_cast<float>(l.weights(r, c)));
            }
        }
        payloads.push_back(std::move(p));
    }
    return detail::encode_container(
        dims, layers.size(), [&](std::size_t i) -> std::string_view { return layers[i].name; },
        [&](std::size_t i) { return payloads[i].data(); }, [&](std::size_t i) { return payloads[i].size(); });
}

std::vector<LinearLayer> decode_layer_bank(std::string_view bytes) {
    auto c = detail::decode_container(bytes, [](const std::vector<std::uint32_t> & dims, std::uint32_t n, std::size_t i) {
        if (dims.size() != 2 * static_cast<std::size_t>(n)) {
            throw FormatError("layer bank: expected " + std::to_string(2 * static_cast<std::size_t>(n)) +
                              " dims for " + std::to_string(n) + " layers, found " + std::to_string(dims.size()));
        }
        return static_cast<std::size_t>(dims[2 * i]) * dims[2 * i + 1];
    });
    std::vector<LinearLayer> layers;
    layers.reserve(c.records.size());
    for (std::size_t i = 0; i < c.records.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(c.dims[2 * i]);
        const auto cols = static_cast<Eigen::Index>(c.dims[2 * i + 1]);
        LinearLayer l;
        l.name = c.records[i].id;
        l.weights.resize(r, cols);
        for (Eigen::Index a = 0; a < r; ++a) {
            for (Eigen::Index b = 0; b < cols; ++b) {
                l.weights(a, b) = c.records[i].payload[static_cast<std::size_t>(a * cols + b)];
            }
        }
        validate(l);
        layers.push_back(std::move(l));
    }
    return layers;
}

void write_layer_bank(const std::vector<LinearLayer> & layers, const std::filesystem::path & path) {
    write_file(path, encode_layer_bank(layers));
}

std::vector<LinearLayer> read_layer_bank(const std::filesystem::path & path) {
    return decode_layer_bank(read_file(path));
}

} // namespace cola
