#pragma once

#include <Eigen/Core>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cola {

enum class Domain { language, commonsense, math, code, multilingual, other };
enum class SampleFormat { raw, qd, qa, qa_erc };

std::string_view to_string(Domain d);
std::string_view to_string(SampleFormat f);
Domain parse_domain(std::string_view s);
SampleFormat parse_format(std::string_view s);

// One candidate calibration text. `tokens` empty means "not materialized";
// call with_fallback_tokens() to fill it deterministically.
struct Sample {
    std::string id;
    std::string text;
    std::vector<std::uint32_t> tokens;
    Domain domain = Domain::other;
    std::string language = "en";
    std::optional<double> difficulty;
    SampleFormat format = SampleFormat::raw;

    bool operator==(const Sample &) const = default;
};

struct Dataset {
    std::string name;
    std::vector<Sample> samples;
    // Cached empirical token distribution over [0, vocab_size).
    std::optional<std::vector<double>> token_distribution;

    std::size_t total_tokens() const;
};

struct CapabilitySpec {
    std::string capability;
    double weight = 1.0;
    Dataset reference;
};

// Throws ValidationError on any broken invariant.
void validate(const Sample & s);
void validate(const Dataset & d);

// ---- tokenization ---------------------------------------------------------

// Lowercased words of `text`, split on Unicode whitespace and punctuation.
// Lowercasing covers ASCII, Latin-1, Greek and Cyrillic capitals.
std::vector<std::string> split_words(std::string_view text);

// Fallback tokenizer: FNV-1a hash of each word modulo vocab_size.
std::vector<std::uint32_t> fallback_tokenize(std::string_view text, std::uint32_t vocab_size);

// Copy of `d` where every sample lacking tokens is tokenized with the fallback.
Dataset with_fallback_tokens(Dataset d, std::uint32_t vocab_size);

// ---- dataset files (JSONL) ------------------------------------------------

nlohmann::json to_json(const Sample & s);
Sample sample_from_json(const nlohmann::json & j);

Dataset load_dataset(const std::filesystem::path & path);
void save_dataset(const Dataset & d, const std::filesystem::path & path);
std::string dataset_to_jsonl(const Dataset & d);

// Empirical distribution count(t) / total over [0, vocab_size).
std::vector<double> token_distribution(const Dataset & d, std::uint32_t vocab_size);

// ---- activations ----------------------------------------------------------

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;

// Row i holds the concatenated per-layer signatures [h^1_i ... h^L_i].
// Immutable after construction; the constructor validates every invariant.
class ActivationMatrix {
public:
    ActivationMatrix(std::vector<std::string> sample_ids, std::vector<std::uint32_t> layer_dims, FloatMatrix data);
    // Down-converts to 32-bit float.
    ActivationMatrix(std::vector<std::string> sample_ids, std::vector<std::uint32_t> layer_dims, const Matrix & data);

    std::size_t rows() const { return sample_ids_.size(); }
    std::size_t cols() const { return static_cast<std::size_t>(data_.cols()); }
    std::size_t num_layers() const { return layer_dims_.size(); }

    const std::vector<std::string> & sample_ids() const { return sample_ids_; }
    const std::vector<std::uint32_t> & layer_dims() const { return layer_dims_; }
    const FloatMatrix & data() const { return data_; }

    std::size_t layer_offset(std::size_t layer) const;
    // Row index of `id`, or nullopt.
    std::optional<std::size_t> find(const std::string & id) const;

    // Rows `rows` restricted to layer `layer`, as a (layer_dim x rows.size()) double matrix.
    Matrix layer_columns(std::size_t layer, const std::vector<std::size_t> & rows) const;

    bool operator==(const ActivationMatrix & o) const;

private:
    std::vector<std::string> sample_ids_;
    std::vector<std::uint32_t> layer_dims_;
    FloatMatrix data_;
    std::map<std::string, std::size_t> index_;
};

void write_activations(const ActivationMatrix & m, const std::filesystem::path & path);
ActivationMatrix read_activations(const std::filesystem::path & path);
std::string encode_activations(const ActivationMatrix & m);
ActivationMatrix decode_activations(std::string_view bytes);

// ---- selection results ----------------------------------------------------

struct SelectionResult {
    std::vector<std::string> selected_ids;         // one per non-empty cluster, cluster order
    std::map<std::string, std::size_t> cluster_assignments;
    Matrix centroids;                              // k x d
    double inertia = 0.0;
    std::uint64_t seed = 0;
};

nlohmann::json to_json(const SelectionResult & r);
SelectionResult selection_from_json(const nlohmann::json & j);
SelectionResult load_selection(const std::filesystem::path & path);

// ---- compression schemes --------------------------------------------------

enum class SchemeKind { magnitude_prune, wanda_prune, reconstruct_prune, rtn_quant, scaled_quant };

std::string_view to_string(SchemeKind k);
SchemeKind parse_scheme_kind(std::string_view s);

struct BlockPattern {
    std::uint32_t n_zero = 4;
    std::uint32_t block_len = 8;
    bool operator==(const BlockPattern &) const = default;
};

struct CompressionScheme {
    SchemeKind kind = SchemeKind::reconstruct_prune;
    std::optional<double> sparsity;
    std::optional<BlockPattern> block_pattern;
    std::optional<int> bits;
    std::optional<std::uint32_t> group_size;
};

void validate(const CompressionScheme & s);
nlohmann::json to_json(const CompressionScheme & s);
CompressionScheme scheme_from_json(const nlohmann::json & j);

// ---- small file helpers ---------------------------------------------------

std::string read_file(const std::filesystem::path & path);
void write_file(const std::filesystem::path & path, std::string_view bytes);
nlohmann::json read_json(const std::filesystem::path & path);

} // namespace cola
