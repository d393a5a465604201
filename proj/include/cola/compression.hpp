#pragma once

#include "cola/data_model.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace cola {

// Rows are output channels, columns input channels.
struct LinearLayer {
    std::string name;
    Matrix weights;

    Eigen::Index rows() const { return weights.rows(); }
    Eigen::Index cols() const { return weights.cols(); }
};

// Columns are calibration positions: inputs is (layer cols) x m.
struct CalibrationBatch {
    Matrix inputs;
};

void validate(const LinearLayer & layer);
void validate(const CalibrationBatch & batch);

// true marks a pruned weight.
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Either an unstructured per-row sparsity or an n:m block pattern.
using PruneTarget = std::variant<double, BlockPattern>;

// || (W - W_hat) X ||_F
double reconstruction_error(const LinearLayer & layer, const LinearLayer & compressed, const CalibrationBatch & batch);

// floor(sparsity * count), robust to the product landing just below an integer.
std::size_t prune_count(double sparsity, std::size_t count);

LinearLayer apply_mask(const LinearLayer & layer, const Mask & mask);
std::size_t count_pruned(const Mask & mask);

// Zeroes the floor(sparsity * r * c) smallest |w| globally, ties in (row, col) order.
Mask magnitude_mask(const LinearLayer & layer, double sparsity);
LinearLayer magnitude_prune(const LinearLayer & layer, double sparsity);

// L2 norm of every input channel (row of X).
std::vector<double> channel_norms(const CalibrationBatch & batch);

// score_ij = |W_ij| * ||X_j||_2
Matrix wanda_scores(const LinearLayer & layer, const CalibrationBatch & batch);

// Per output row: the lowest scores (ties to the lower column) up to the
// sparsity count, or n_zero per contiguous block of block_len columns.
Mask wanda_mask(const LinearLayer & layer, const CalibrationBatch & batch, const PruneTarget & target);
LinearLayer wanda_prune(const LinearLayer & layer, const CalibrationBatch & batch, const PruneTarget & target);

// Refits each row's surviving weights w_S on the calibration batch:
//   min_w || w X_S - w0 X ||^2 + lambda || w - w0_S ||^2,
//   lambda = 0.01 * mean(diag(X X^T)).
// Normal equations (H_SS + lambda I) w = H_S: w0 + lambda w0_S with H = X X^T.
// The damping is anchored at the masked weights, so the undamped objective
// never ends above that of plain masking.
LinearLayer reconstruct_with_mask(const LinearLayer & layer, const CalibrationBatch & batch, const Mask & mask);
LinearLayer reconstruct_prune(const LinearLayer & layer, const CalibrationBatch & batch, const PruneTarget & target);

// Symmetric round-to-nearest, scale = max|w| / (2^(bits-1) - 1) per group of
// group_size consecutive input channels (whole row when absent).
LinearLayer rtn_quantize(const LinearLayer & layer, int bits, std::optional<std::uint32_t> group_size = {});
// Per-row, per-group scales as used by rtn_quantize: (rows) x (cols / group_size).
Matrix rtn_scales(const Matrix & weights, int bits, std::optional<std::uint32_t> group_size = {});

// Activation-aware variant: s_j = max(||X_j||^0.5, 1e-8) normalized to unit
// geometric mean (exactly 1 when all channels agree); returns
// rtn(W diag(s)) diag(s)^-1.
std::vector<double> activation_scales(const CalibrationBatch & batch);
LinearLayer scaled_quantize(const LinearLayer & layer, const CalibrationBatch & batch, int bits,
                            std::optional<std::uint32_t> group_size = {});

// Dispatches on scheme.kind. `batch` is ignored by data-free schemes.
LinearLayer compress(const LinearLayer & layer, const CalibrationBatch & batch, const CompressionScheme & scheme);

// Layer l consumes activation segment (l mod num_layers) of the store; the
// segment width must equal the layer's input dimension.
std::size_t segment_for_layer(const ActivationMatrix & store, std::size_t layer_index, const LinearLayer & layer);

// Compresses every layer using only the selected rows of `calib`, then scores
// reconstruction error on all rows of `eval`. One error per layer.
std::vector<double> evaluate_calibration(const std::vector<LinearLayer> & layers, const ActivationMatrix & calib,
                                         const std::vector<std::string> & selection, const CompressionScheme & scheme,
                                         const ActivationMatrix & eval);

// Layer banks reuse the COLA container: one record per layer (id = name),
// dims hold (rows, cols) pairs, payload is the row-major weight matrix.
void write_layer_bank(const std::vector<LinearLayer> & layers, const std::filesystem::path & path);
std::vector<LinearLayer> read_layer_bank(const std::filesystem::path & path);
std::string encode_layer_bank(const std::vector<LinearLayer> & layers);
std::vector<LinearLayer> decode_layer_bank(std::string_view bytes);

} // namespace cola
