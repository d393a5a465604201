#include "cola/data_model.hpp"

#include "cola/errors.hpp"
#include "cola/rng.hpp"
#include "container.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace cola {

using nlohmann::json;

// ---- enums ----------------------------------------------------------------

std::string_view to_string(Domain d) {
    switch (d) {
        case Domain::language: return "language";
        case Domain::commonsense: return "commonsense";
        case Domain::math: return "math";
        case Domain::code: return "code";
        case Domain::multilingual: return "multilingual";
        case Domain::other: return "other";
    }
    return "other";
}

std::string_view to_string(SampleFormat f) {
    switch (f) {
        case SampleFormat::raw: return "raw";
        case SampleFormat::qd: return "qd";
        case SampleFormat::qa: return "qa";
        case SampleFormat::qa_erc: return "qa_erc";
    }
    return "raw";
}

Domain parse_domain(std::string_view s) {
    for (auto d : {Domain::language, Domain::commonsense, Domain::math, Domain::code, Domain::multilingual,
                   Domain::other}) {
        if (to_string(d) == s) {
            return d;
        }
    }
    throw ValidationError("unknown domain '" + std::string(s) + "'");
}

SampleFormat parse_format(std::string_view s) {
    for (auto f : {SampleFormat::raw, SampleFormat::qd, SampleFormat::qa, SampleFormat::qa_erc}) {
        if (to_string(f) == s) {
            return f;
        }
    }
    throw ValidationError("unknown format '" + std::string(s) + "'");
}

// ---- validation -----------------------------------------------------------

std::size_t Dataset::total_tokens() const {
    std::size_t n = 0;
    for (const auto & s : samples) {
        n += s.tokens.size();
    }
    return n;
}

void validate(const Sample & s) {
    if (s.id.empty()) {
        throw ValidationError("sample id must be nonempty");
    }
    if (s.difficulty) {
        const double v = *s.difficulty;
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("sample '" + s.id + "': difficulty must lie in [0,1]");
        }
    }
}

void validate(const Dataset & d) {
    std::set<std::string_view> seen;
    for (const auto & s : d.samples) {
        validate(s);
        if (!seen.insert(s.id).second) {
            throw ValidationError("dataset '" + d.name + "': duplicate sample id '" + s.id + "'");
        }
    }
    if (d.token_distribution) {
        const auto & cached = *d.token_distribution;
        double sum = 0.0;
        for (double p : cached) {
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ValidationError("dataset '" + d.name + "': cached token distribution does not sum to 1");
        }
        const auto fresh = token_distribution(d, static_cast<std::uint32_t>(cached.size()));
        for (std::size_t t = 0; t < cached.size(); ++t) {
            if (std::abs(fresh[t] - cached[t]) > 1e-12) {
                throw ValidationError("dataset '" + d.name + "': cached token distribution is stale");
            }
        }
    }
}

// ---- tokenization ---------------------------------------------------------

namespace {

// Decodes one UTF-8 code point starting at text[i]; invalid bytes decode to U+FFFD.
char32_t decode_utf8(std::string_view text, std::size_t & i) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= text.size()) {
            return -1;
        }
        const auto b = static_cast<unsigned char>(text[i + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        i += 1;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        i += 1;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        const int c = cont(k);
        if (c < 0) {
            i += 1;
            return 0xFFFD;
        }
        cp = (cp << 6) | static_cast<char32_t>(c);
    }
    i += len;
    return cp;
}

void encode_utf8(char32_t cp, std::string & out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
           c == 0x3000;
}

bool is_punct(char32_t c) {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
               (c >= 0x7B && c <= 0x7E);
    }
    return (c >= 0xA1 && c <= 0xBF) || c == 0xD7 || c == 0xF7 || (c >= 0x2010 && c <= 0x2027) ||
           (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x303F) || (c >= 0xFF01 && c <= 0xFF0F) ||
           (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

char32_t to_lower(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 0x20;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    return c;
}

} // namespace

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t c = decode_utf8(text, i);
        if (is_space(c) || is_punct(c)) {
            if (!cur.empty()) {
                words.push_back(std::move(cur));
                cur.clear();
            }
            continue;
        }
        encode_utf8(to_lower(c), cur);
    }
    if (!cur.empty()) {
        words.push_back(std::move(cur));
    }
    return words;
}

std::vector<std::uint32_t> fallback_tokenize(std::string_view text, std::uint32_t vocab_size) {
    if (vocab_size == 0) {
        throw ArgumentError("vocab_size must be positive");
    }
    std::vector<std::uint32_t> tokens;
    for (const auto & w : split_words(text)) {
        tokens.push_back(static_cast<std::uint32_t>(fnv1a64(w) % vocab_size));
    }
    return tokens;
}

Dataset with_fallback_tokens(Dataset d, std::uint32_t vocab_size) {
    for (auto & s : d.samples) {
        if (s.tokens.empty()) {
            s.tokens = fallback_tokenize(s.text, vocab_size);
        }
    }
    d.token_distribution.reset();
    return d;
}

// ---- JSONL ----------------------------------------------------------------

json to_json(const Sample & s) {
    json j = json::object();
    j["id"] = s.id;
    j["text"] = s.text;
    if (!s.tokens.empty()) {
        j["tokens"] = s.tokens;
    }
    j["domain"] = to_string(s.domain);
    j["language"] = s.language;
    if (s.difficulty) {
        j["difficulty"] = *s.difficulty;
    }
    j["format"] = to_string(s.format);
    return j;
}

Sample sample_from_json(const json & j) {
    if (!j.is_object()) {
        throw ValidationError("sample must be a JSON object");
    }
    auto need_string = [&](const char * key) -> std::string {
        if (!j.contains(key) || !j.at(key).is_string()) {
            throw ValidationError(std::string("missing or non-string field '") + key + "'");
        }
        return j.at(key).get<std::string>();
    };
    Sample s;
    s.id = need_string("id");
    s.text = need_string("text");
    s.domain = parse_domain(need_string("domain"));
    s.language = need_string("language");
    s.format = parse_format(need_string("format"));
    if (j.contains("tokens") && !j.at("tokens").is_null()) {
        const auto & t = j.at("tokens");
        if (!t.is_array()) {
            throw ValidationError("field 'tokens' must be an array");
        }
        if (t.empty()) {
            throw ValidationError("sample '" + s.id + "': tokens must be nonempty when present");
        }
        s.tokens.reserve(t.size());
        for (const auto & v : t) {
            if (!v.is_number_integer()) {
                throw ValidationError("sample '" + s.id + "': token ids must be integers");
            }
            const auto id = v.get<std::int64_t>();
            if (id < 0 || id > static_cast<std::int64_t>(UINT32_MAX)) {
                throw ValidationError("sample '" + s.id + "': token id " + std::to_string(id) + " out of range");
            }
            s.tokens.push_back(static_cast<std::uint32_t>(id));
        }
    }
    if (j.contains("difficulty") && !j.at("difficulty").is_null()) {
        if (!j.at("difficulty").is_number()) {
            throw ValidationError("sample '" + s.id + "': difficulty must be a number");
        }
        s.difficulty = j.at("difficulty").get<double>();
    }
    validate(s);
    return s;
}

Dataset load_dataset(const std::filesystem::path & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open dataset '" + path.string() + "'");
    }
    Dataset d;
    d.name = path.stem().string();
    std::map<std::string, std::size_t> first_line;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error & e) {
            throw ParseError(where + "malformed JSON (" + e.what() + ")");
        }
        Sample s;
        try {
            s = sample_from_json(j);
        } catch (const ValidationError & e) {
            throw ValidationError(where + e.what());
        }
        auto [it, inserted] = first_line.emplace(s.id, line_no);
        if (!inserted) {
            throw ValidationError(where + "duplicate id '" + s.id + "' (first seen on line " +
                                  std::to_string(it->second) + ")");
        }
        d.samples.push_back(std::move(s));
    }
    return d;
}

std::string dataset_to_jsonl(const Dataset & d) {
    std::string out;
    for (const auto & s : d.samples) {
        out += to_json(s).dump();
        out += '\n';
    }
    return out;
}

void save_dataset(const Dataset & d, const std::filesystem::path & path) {
    write_file(path, dataset_to_jsonl(d));
}

std::vector<double> token_distribution(const Dataset & d, std::uint32_t vocab_size) {
    if (vocab_size == 0) {
        throw ArgumentError("vocab_size must be positive");
    }
    std::vector<std::uint64_t> counts(vocab_size, 0);
    std::uint64_t total = 0;
    for (const auto & s : d.samples) {
        for (auto t : s.tokens) {
            if (t >= vocab_size) {
                throw OutOfRangeError("sample '" + s.id + "': token id " + std::to_string(t) +
                                      " >= vocab_size " + std::to_string(vocab_size));
            }
            ++counts[t];
            ++total;
        }
    }
    if (total == 0) {
        throw ArgumentError("dataset '" + d.name + "' has zero tokens");
    }
    std::vector<double> p(vocab_size);
    const double denom = static_cast<double>(total);
    for (std::size_t t = 0; t < vocab_size; ++t) {
        p[t] = static_cast<double>(counts[t]) / denom;
    }
    return p;
}

// ---- activations ----------------------------------------------------------

ActivationMatrix::ActivationMatrix(std::vector<std::string> sample_ids, std::vector<std::uint32_t> layer_dims,
                                   FloatMatrix data)
    : sample_ids_(std::move(sample_ids)), layer_dims_(std::move(layer_dims)), data_(std::move(data)) {
    std::size_t total = 0;
    for (auto d : layer_dims_) {
        if (d == 0) {
            throw ValidationError("layer dimensions must be positive");
        }
        total += d;
    }
    if (layer_dims_.empty()) {
        throw ValidationError("activation matrix needs at least one layer");
    }
    if (static_cast<std::size_t>(data_.rows()) != sample_ids_.size()) {
        throw ShapeError("activation rows (" + std::to_string(data_.rows()) + ") != sample id count (" +
                         std::to_string(sample_ids_.size()) + ")");
    }
    if (static_cast<std::size_t>(data_.cols()) != total) {
        throw ShapeError("activation columns (" + std::to_string(data_.cols()) + ") != sum of layer dims (" +
                         std::to_string(total) + ")");
    }
    for (std::size_t i = 0; i < sample_ids_.size(); ++i) {
        if (!data_.row(static_cast<Eigen::Index>(i)).allFinite()) {
            throw ValidationError("activation row " + std::to_string(i) + " ('" + sample_ids_[i] +
                                  "') contains NaN or Inf");
        }
        if (!index_.emplace(sample_ids_[i], i).second) {
            throw ValidationError("duplicate activation sample id '" + sample_ids_[i] + "'");
        }
    }
}

ActivationMatrix::ActivationMatrix(std::vector<std::string> sample_ids, std::vector<std::uint32_t> layer_dims,
                                   const Matrix & data)
    : ActivationMatrix(std::move(sample_ids), std::move(layer_dims), FloatMatrix(data.cast<float>())) {}

std::size_t ActivationMatrix::layer_offset(std::size_t layer) const {
    if (layer >= layer_dims_.size()) {
        throw ArgumentError("layer index " + std::to_string(layer) + " out of range");
    }
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) {
        off += layer_dims_[l];
    }
    return off;
}

std::optional<std::size_t> ActivationMatrix::find(const std::string & id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Matrix ActivationMatrix::layer_columns(std::size_t layer, const std::vector<std::size_t> & rows) const {
    const auto off = static_cast<Eigen::Index>(layer_offset(layer));
    const auto dim = static_cast<Eigen::Index>(layer_dims_[layer]);
    Matrix out(dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[j] >= this->rows()) {
            throw ArgumentError("row index out of range");
        }
        out.col(static_cast<Eigen::Index>(j)) =
            data_.row(static_cast<Eigen::Index>(rows[j])).segment(off, dim).transpose().cast<double>();
    }
    return out;
}

bool ActivationMatrix::operator==(const ActivationMatrix & o) const {
    if (sample_ids_ != o.sample_ids_ || layer_dims_ != o.layer_dims_ || data_.rows() != o.data_.rows() ||
        data_.cols() != o.data_.cols()) {
        return false;
    }
    // Bitwise comparison: -0.0f and 0.0f differ.
    return std::memcmp(data_.data(), o.data_.data(), sizeof(float) * static_cast<std::size_t>(data_.size())) == 0;
}

std::string encode_activations(const ActivationMatrix & m) {
    const auto D = m.cols();
    return detail::encode_container(
        m.layer_dims(), m.rows(), [&](std::size_t i) -> std::string_view { return m.sample_ids()[i]; },
        [&](std::size_t i) { return m.data().data() + i * D; }, [&](std::size_t) { return D; });
}

ActivationMatrix decode_activations(std::string_view bytes) {
    std::size_t D = 0;
    auto c = detail::decode_container(bytes, [&](const std::vector<std::uint32_t> & dims, std::uint32_t, std::size_t) {
        if (D == 0) {
            for (auto d : dims) {
                D += d;
            }
        }
        return D;
    });
    if (c.dims.empty()) {
        throw FormatError("activation file declares zero layers");
    }
    D = 0;
    for (auto d : c.dims) {
        if (d == 0) {
            throw FormatError("activation file declares a zero-width layer");
        }
        D += d;
    }
    FloatMatrix data(static_cast<Eigen::Index>(c.records.size()), static_cast<Eigen::Index>(D));
    std::vector<std::string> ids;
    ids.reserve(c.records.size());
    for (std::size_t i = 0; i < c.records.size(); ++i) {
        std::memcpy(data.data() + i * D, c.records[i].payload.data(), D * sizeof(float));
        ids.push_back(std::move(c.records[i].id));
    }
    return ActivationMatrix(std::move(ids), std::move(c.dims), std::move(data));
}

void write_activations(const ActivationMatrix & m, const std::filesystem::path & path) {
    write_file(path, encode_activations(m));
}

ActivationMatrix read_activations(const std::filesystem::path & path) {
    return decode_activations(read_file(path));
}

// ---- selection results ----------------------------------------------------

json to_json(const SelectionResult & r) {
    json j = json::object();
    j["selected_ids"] = r.selected_ids;
    json assign = json::object();
    for (const auto & [id, c] : r.cluster_assignments) {
        assign[id] = c;
    }
    j["cluster_assignments"] = assign;
    json cents = json::array();
    for (Eigen::Index i = 0; i < r.centroids.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < r.centroids.cols(); ++k) {
            row.push_back(r.centroids(i, k));
        }
        cents.push_back(std::move(row));
    }
    j["centroids"] = cents;
    j["inertia"] = r.inertia;
    j["seed"] = r.seed;
    return j;
}

SelectionResult selection_from_json(const json & j) {
    try {
        SelectionResult r;
        r.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
        for (const auto & [id, c] : j.at("cluster_assignments").items()) {
            r.cluster_assignments[id] = c.get<std::size_t>();
        }
        const auto & cents = j.at("centroids");
        const auto k = static_cast<Eigen::Index>(cents.size());
        const auto d = k > 0 ? static_cast<Eigen::Index>(cents.at(0).size()) : 0;
        r.centroids.resize(k, d);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (static_cast<Eigen::Index>(cents.at(i).size()) != d) {
                throw ShapeError("ragged centroid matrix");
            }
            for (Eigen::Index c = 0; c < d; ++c) {
                r.centroids(i, c) = cents.at(i).at(c).get<double>();
            }
        }
        r.inertia = j.at("inertia").get<double>();
        r.seed = j.at("seed").get<std::uint64_t>();
        return r;
    } catch (const json::exception & e) {
        throw ParseError(std::string("invalid selection JSON: ") + e.what());
    }
}

SelectionResult load_selection(const std::filesystem::path & path) {
    return selection_from_json(read_json(path));
}

// ---- compression schemes --------------------------------------------------

std::string_view to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::magnitude_prune: return "magnitude_prune";
        case SchemeKind::wanda_prune: return "wanda_prune";
        case SchemeKind::reconstruct_prune: return "reconstruct_prune";
        case SchemeKind::rtn_quant: return "rtn_quant";
        case SchemeKind::scaled_quant: return "scaled_quant";
    }
    return "reconstruct_prune";
}

SchemeKind parse_scheme_kind(std::string_view s) {
    for (auto k : {SchemeKind::magnitude_prune, SchemeKind::wanda_prune, SchemeKind::reconstruct_prune,
                   SchemeKind::rtn_quant, SchemeKind::scaled_quant}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw ValidationError("unknown compression scheme kind '" + std::string(s) + "'");
}

void validate(const CompressionScheme & s) {
    if (s.sparsity && s.block_pattern) {
        throw ValidationError("sparsity and block_pattern are mutually exclusive");
    }
    if (s.sparsity && (!std::isfinite(*s.sparsity) || *s.sparsity < 0.0 || *s.sparsity > 1.0)) {
        throw ValidationError("sparsity must lie in [0,1]");
    }
    if (s.block_pattern && (s.block_pattern->block_len == 0 || s.block_pattern->n_zero >= s.block_pattern->block_len)) {
        throw ValidationError("block_pattern requires n_zero < block_len");
    }
    if (s.bits && *s.bits < 2) {
        throw ValidationError("bits must be >= 2");
    }
    if (s.group_size && *s.group_size == 0) {
        throw ValidationError("group_size must be positive");
    }
    switch (s.kind) {
        case SchemeKind::magnitude_prune:
        case SchemeKind::reconstruct_prune:
            if (!s.sparsity && !s.block_pattern) {
                throw ValidationError(std::string(to_string(s.kind)) + " needs sparsity or block_pattern");
            }
            if (s.kind == SchemeKind::magnitude_prune && s.block_pattern) {
                throw ValidationError("magnitude_prune supports sparsity only");
            }
            break;
        case SchemeKind::wanda_prune:
            if (!s.sparsity && !s.block_pattern) {
                throw ValidationError("wanda_prune needs sparsity or block_pattern");
            }
            break;
        case SchemeKind::rtn_quant:
        case SchemeKind::scaled_quant:
            if (!s.bits) {
                throw ValidationError(std::string(to_string(s.kind)) + " needs bits");
            }
            break;
    }
}

json to_json(const CompressionScheme & s) {
    json j = json::object();
    j["kind"] = to_string(s.kind);
    if (s.sparsity) j["sparsity"] = *s.sparsity;
    if (s.block_pattern) j["block_pattern"] = {s.block_pattern->n_zero, s.block_pattern->block_len};
    if (s.bits) j["bits"] = *s.bits;
    if (s.group_size) j["group_size"] = *s.group_size;
    return j;
}

CompressionScheme scheme_from_json(const json & j) {
    CompressionScheme s;
    try {
        s.kind = parse_scheme_kind(j.at("kind").get<std::string>());
        if (j.contains("sparsity") && !j["sparsity"].is_null()) s.sparsity = j["sparsity"].get<double>();
        if (j.contains("block_pattern") && !j["block_pattern"].is_null()) {
            const auto & bp = j["block_pattern"];
            if (!bp.is_array() || bp.size() != 2) {
                throw ValidationError("block_pattern must be [n_zero, block_len]");
            }
            s.block_pattern = BlockPattern{bp[0].get<std::uint32_t>(), bp[1].get<std::uint32_t>()};
        }
        if (j.contains("bits") && !j["bits"].is_null()) s.bits = j["bits"].get<int>();
        if (j.contains("group_size") && !j["group_size"].is_null()) s.group_size = j["group_size"].get<std::uint32_t>();
    } catch (const json::exception & e) {
        throw ParseError(std::string("invalid compression scheme JSON: ") + e.what());
    }
    validate(s);
    return s;
}

// ---- files ----------------------------------------------------------------

std::string read_file(const std::filesystem::path & path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path & path, std::string_view bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to '" + path.string() + "'");
    }
}

json read_json(const std::filesystem::path & path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error & e) {
        throw ParseError(path.string() + ": malformed JSON (" + e.what() + ")");
    }
}

} // namespace cola
