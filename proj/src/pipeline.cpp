#include "cola/pipeline.hpp"

#include "cola/compression.hpp"
#include "cola/errors.hpp"
#include "cola/parallel.hpp"
#include "cola/rng.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <set>

namespace cola {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

fs::path PipelineConfig::resolve(const fs::path & p) const {
    return p.is_absolute() ? p : base_dir / p;
}

namespace {

template <typename T>
T get_or(const json & j, const char * key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    return j.at(key).get<T>();
}

void reject_unknown(const json & j, std::initializer_list<const char *> allowed, const std::string & where) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto & [key, _] : j.items()) {
        if (!ok.count(key)) {
            throw ValidationError(where + ": unknown key '" + key + "'");
        }
    }
}

} // namespace

PipelineConfig parse_pipeline_config(const json & j, const fs::path & base_dir) {
    if (!j.is_object()) {
        throw ValidationError("pipeline config must be a JSON object");
    }
    reject_unknown(j,
                   {"seed", "vocab_size", "output_dir", "pool", "capabilities", "budget", "alpha", "kl_mode",
                    "embsim_mode", "epsilon", "embedding_dim", "processing", "activations", "projection", "kmeans",
                    "harness", "scheme"},
                   "config");
    PipelineConfig cfg;
    cfg.base_dir = base_dir;
    try {
        cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
        cfg.vocab_size = get_or<std::uint32_t>(j, "vocab_size", 32000);
        cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
        for (const auto & p : get_or<std::vector<std::string>>(j, "pool", {})) {
            cfg.pool.emplace_back(p);
        }
        if (j.contains("capabilities")) {
            for (const auto & [name, spec] : j.at("capabilities").items()) {
                reject_unknown(spec, {"weight", "reference", "reference_path"}, "capability '" + name + "'");
                CapabilityRef ref;
                ref.capability = name;
                ref.weight = get_or<double>(spec, "weight", 1.0);
                const std::string path = spec.contains("reference") ? spec.at("reference").get<std::string>()
                                                                    : spec.at("reference_path").get<std::string>();
                ref.reference = path;
                cfg.capabilities.push_back(std::move(ref));
            }
        }
        cfg.budget = get_or<std::size_t>(j, "budget", cfg.pool.size());
        cfg.coverage.vocab_size = cfg.vocab_size;
        cfg.coverage.alpha = get_or<double>(j, "alpha", 0.6);
        cfg.coverage.epsilon = get_or<double>(j, "epsilon", 1e-9);
        cfg.coverage.kl_mode = parse_kl_mode(get_or<std::string>(j, "kl_mode", "exp-neg"));
        cfg.coverage.embsim_mode = parse_embsim_mode(get_or<std::string>(j, "embsim_mode", "centroid"));
        cfg.embedding_dim = get_or<std::size_t>(j, "embedding_dim", 256);

        cfg.processing.vocab_size = cfg.vocab_size;
        if (j.contains("processing")) {
            const auto & p = j.at("processing");
            reject_unknown(p, {"target_length", "min_length", "format", "mix", "count"}, "processing");
            cfg.processing.target_length = get_or<std::uint32_t>(p, "target_length", 2048);
            cfg.processing.min_length = get_or<std::uint32_t>(p, "min_length", 256);
            cfg.processing.format_policy = parse_format_policy(get_or<std::string>(p, "format", "passthrough"));
            if (p.contains("mix") && !p.at("mix").is_null()) {
                const auto mix = p.at("mix").get<std::vector<double>>();
                if (mix.size() != 3) {
                    throw ValidationError("processing.mix needs exactly three weights");
                }
                cfg.processing.difficulty_mix = TierMix{mix[0], mix[1], mix[2]};
            }
            if (p.contains("count") && !p.at("count").is_null()) {
                cfg.process_count = p.at("count").get<std::size_t>();
            }
        }
        validate(cfg.processing);

        if (j.contains("activations") && !j.at("activations").is_null()) {
            cfg.activations = fs::path(j.at("activations").get<std::string>());
        }
        if (j.contains("projection")) {
            reject_unknown(j.at("projection"), {"dim"}, "projection");
            cfg.projection_dim = get_or<std::size_t>(j.at("projection"), "dim", 64);
        }
        if (j.contains("kmeans")) {
            const auto & k = j.at("kmeans");
            reject_unknown(k, {"k", "max_iters", "tol", "restarts"}, "kmeans");
            cfg.kmeans.k = get_or<std::size_t>(k, "k", 128);
            cfg.kmeans.max_iters = get_or<std::size_t>(k, "max_iters", 300);
            cfg.kmeans.tol = get_or<double>(k, "tol", 1e-6);
            cfg.kmeans.n_restarts = get_or<std::size_t>(k, "restarts", 10);
        }
        if (j.contains("harness") && !j.at("harness").is_null()) {
            const auto & h = j.at("harness");
            reject_unknown(h, {"layers", "eval", "candidates"}, "harness");
            HarnessPaths paths;
            paths.layers = h.at("layers").get<std::string>();
            paths.eval = h.at("eval").get<std::string>();
            if (h.contains("candidates") && !h.at("candidates").is_null()) {
                paths.candidates = fs::path(h.at("candidates").get<std::string>());
            }
            cfg.harness = std::move(paths);
        }
        if (j.contains("scheme") && !j.at("scheme").is_null()) {
            cfg.scheme = scheme_from_json(j.at("scheme"));
        }
    } catch (const json::exception & e) {
        throw ValidationError(std::string("pipeline config: ") + e.what());
    }
    if (cfg.kmeans.k == 0 || cfg.projection_dim == 0) {
        throw ValidationError("pipeline config: k and projection dim must be positive");
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const fs::path & path) {
    const auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const std::string bytes = read_file(path);
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error & e) {
        throw ParseError(path.string() + ": malformed JSON (" + e.what() + ")");
    }
    auto cfg = parse_pipeline_config(j, base);
    cfg.source_sha256 = sha256_hex(bytes);
    return cfg;
}

std::uint64_t stage_seed(const PipelineConfig & cfg, std::string_view stage) {
    return derive_seed(cfg.seed, stage);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string sha256_file(const fs::path & path) {
    return sha256_hex(read_file(path));
}

namespace {

// Tracks files written by one run so a failure can remove them.
class OutputSet {
public:
    explicit OutputSet(const PipelineConfig & cfg) : cfg_(cfg) {}

    ordered_json write(const std::string & name, std::string_view bytes) {
        const fs::path rel = cfg_.output_dir / name;
        const fs::path abs = cfg_.resolve(rel);
        write_file(abs, bytes);
        written_.push_back(abs);
        return ordered_json{{"path", rel.generic_string()}, {"sha256", sha256_hex(bytes)}};
    }

    void remove_all() noexcept {
        for (const auto & p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        written_.clear();
    }

private:
    const PipelineConfig & cfg_;
    std::vector<fs::path> written_;
};

ordered_json input_entry(const PipelineConfig & cfg, const fs::path & rel) {
    return ordered_json{{"path", rel.generic_string()}, {"sha256", sha256_file(cfg.resolve(rel))}};
}

// Equal split of `count` across `parts` datasets, remainder to the earliest.
std::vector<std::size_t> equal_split(std::size_t count, std::size_t parts) {
    std::vector<std::size_t> out(parts, count / parts);
    for (std::size_t i = 0; i < count % parts; ++i) {
        ++out[i];
    }
    return out;
}

template <typename Fn>
auto run_stage(std::string_view stage, OutputSet & outputs, Fn && fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError &) {
        outputs.remove_all();
        throw;
    } catch (const std::exception & e) {
        outputs.remove_all();
        throw StageError(std::string(stage), e.what());
    }
}

ActivationMatrix restrict_rows(const ActivationMatrix & acts, const std::vector<std::string> & ids) {
    FloatMatrix data(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(acts.cols()));
    std::size_t missing = 0;
    std::string first_missing;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto r = acts.find(ids[i]);
        if (!r) {
            if (missing++ == 0) first_missing = ids[i];
            continue;
        }
        data.row(static_cast<Eigen::Index>(i)) = acts.data().row(static_cast<Eigen::Index>(*r));
    }
    if (missing > 0) {
        throw LookupError("activations missing for " + std::to_string(missing) + " processed samples (first: '" +
                          first_missing + "')");
    }
    return ActivationMatrix(ids, acts.layer_dims(), std::move(data));
}

ordered_json scheme_json(const CompressionScheme & s) {
    ordered_json j;
    const auto plain = to_json(s);
    for (const auto & [k, v] : plain.items()) {
        j[k] = v;
    }
    return j;
}

} // namespace

ordered_json run_pipeline(const PipelineConfig & cfg) {
    OutputSet outputs(cfg);
    ordered_json manifest;
    manifest["format"] = "cola-manifest/1";
    manifest["config_sha256"] = cfg.source_sha256.empty() ? ordered_json(nullptr) : ordered_json(cfg.source_sha256);
    manifest["seed"] = cfg.seed;
    manifest["stages"] = ordered_json::array();

    // Stage 1: dataset selection.
    std::vector<Dataset> pool;
    std::vector<DatasetPick> picks;
    run_stage(k_stage_select_datasets, outputs, [&] {
        if (cfg.pool.empty()) {
            throw ArgumentError("no pool datasets configured");
        }
        ordered_json inputs = ordered_json::array();
        for (const auto & p : cfg.pool) {
            pool.push_back(with_fallback_tokens(load_dataset(cfg.resolve(p)), cfg.vocab_size));
            inputs.push_back(input_entry(cfg, p));
        }
        std::vector<CapabilitySpec> caps;
        for (const auto & c : cfg.capabilities) {
            caps.push_back({c.capability, c.weight, with_fallback_tokens(load_dataset(cfg.resolve(c.reference)), cfg.vocab_size)});
            inputs.push_back(input_entry(cfg, c.reference));
        }
        if (caps.empty()) {
            throw ArgumentError("no capabilities configured");
        }
        const HashingEmbeddingProvider provider(cfg.embedding_dim);
        picks = select_datasets(pool, caps, cfg.budget, provider, cfg.coverage);

        ordered_json sel = ordered_json::array();
        for (const auto & pk : picks) {
            sel.push_back({{"name", pk.name},
                           {"path", cfg.pool[pk.pool_index].generic_string()},
                           {"marginal_gain", pk.marginal_gain},
                           {"objective", pk.objective}});
        }
        ordered_json caps_json = ordered_json::object();
        for (const auto & c : cfg.capabilities) {
            caps_json[c.capability] = {{"weight", c.weight}, {"reference", c.reference.generic_string()}};
        }
        ordered_json stage;
        stage["name"] = k_stage_select_datasets;
        stage["seed"] = nullptr;
        stage["params"] = {{"budget", cfg.budget},
                           {"alpha", cfg.coverage.alpha},
                           {"kl_mode", to_string(cfg.coverage.kl_mode)},
                           {"embsim_mode", to_string(cfg.coverage.embsim_mode)},
                           {"epsilon", cfg.coverage.epsilon},
                           {"vocab_size", cfg.vocab_size},
                           {"embedding", {{"provider", provider.name()}, {"dim", provider.dim()}}},
                           {"capabilities", caps_json}};
        stage["inputs"] = inputs;
        stage["outputs"] = ordered_json::array({outputs.write("selected_datasets.json", sel.dump(2) + "\n")});
        manifest["stages"].push_back(stage);
    });

    // Stage 2: processing.
    Dataset processed;
    run_stage(k_stage_process, outputs, [&] {
        const std::uint64_t seed = stage_seed(cfg, k_stage_process);
        std::vector<std::size_t> counts;
        if (cfg.process_count) {
            counts = equal_split(*cfg.process_count, picks.size());
        }
        std::set<std::string> seen;
        processed.name = "processed";
        for (std::size_t i = 0; i < picks.size(); ++i) {
            ProcessingConfig pc = cfg.processing;
            pc.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
            std::optional<std::size_t> count;
            if (cfg.process_count) {
                count = counts[i];
            }
            Dataset part = (count && *count == 0) ? Dataset{} : process_dataset(pool[picks[i].pool_index], pc, count);
            for (auto & s : part.samples) {
                if (!seen.insert(s.id).second) {
                    throw ValidationError("duplicate sample id '" + s.id + "' across selected datasets");
                }
                processed.samples.push_back(std::move(s));
            }
        }
        if (processed.samples.empty()) {
            throw InsufficientDataError("processing left no samples");
        }
        ordered_json stage;
        stage["name"] = k_stage_process;
        stage["seed"] = seed;
        ordered_json params = {{"target_length", cfg.processing.target_length},
                               {"min_length", cfg.processing.min_length},
                               {"format", to_string(cfg.processing.format_policy)},
                               {"vocab_size", cfg.vocab_size}};
        params["mix"] = cfg.processing.difficulty_mix ? ordered_json(*cfg.processing.difficulty_mix) : ordered_json(nullptr);
        params["count"] = cfg.process_count ? ordered_json(*cfg.process_count) : ordered_json(nullptr);
        stage["params"] = params;
        stage["inputs"] = ordered_json::array({ordered_json{{"stage", k_stage_select_datasets}}});
        stage["outputs"] = ordered_json::array({outputs.write("processed.jsonl", dataset_to_jsonl(processed))});
        stage["sample_count"] = processed.samples.size();
        manifest["stages"].push_back(stage);
    });

    // Stage 3: activation ingestion and representative selection.
    std::optional<ActivationMatrix> calib;
    SelectionResult selection;
    run_stage(k_stage_select_samples, outputs, [&] {
        if (!cfg.activations) {
            throw ArgumentError("no activation file configured");
        }
        const auto acts = read_activations(cfg.resolve(*cfg.activations));
        std::vector<std::string> ids;
        for (const auto & s : processed.samples) {
            ids.push_back(s.id);
        }
        calib.emplace(restrict_rows(acts, ids));
        const std::uint64_t seed = stage_seed(cfg, k_stage_select_samples);
        selection = select_samples(*calib, cfg.projection_dim, cfg.kmeans, seed);
        ordered_json stage;
        stage["name"] = k_stage_select_samples;
        stage["seed"] = seed;
        stage["params"] = {{"projection_dim", cfg.projection_dim},
                           {"k", cfg.kmeans.k},
                           {"max_iters", cfg.kmeans.max_iters},
                           {"tol", cfg.kmeans.tol},
                           {"restarts", cfg.kmeans.n_restarts}};
        stage["inputs"] = ordered_json::array({input_entry(cfg, *cfg.activations)});
        stage["outputs"] = ordered_json::array({outputs.write("selection.json", to_json(selection).dump(2) + "\n")});
        stage["selected_count"] = selection.selected_ids.size();
        manifest["stages"].push_back(stage);
    });

    if (cfg.harness && cfg.scheme) {
        run_stage(k_stage_evaluate, outputs, [&] {
            const auto layers = read_layer_bank(cfg.resolve(cfg.harness->layers));
            const auto eval = read_activations(cfg.resolve(cfg.harness->eval));
            const auto errors = evaluate_calibration(layers, *calib, selection.selected_ids, *cfg.scheme, eval);
            ordered_json report;
            report["scheme"] = scheme_json(*cfg.scheme);
            report["per_layer"] = ordered_json::array();
            double mean = 0.0;
            for (std::size_t l = 0; l < layers.size(); ++l) {
                report["per_layer"].push_back({{"layer", layers[l].name}, {"error", errors[l]}});
                mean += errors[l];
            }
            report["mean"] = layers.empty() ? 0.0 : mean / static_cast<double>(layers.size());
            ordered_json stage;
            stage["name"] = k_stage_evaluate;
            stage["seed"] = nullptr;
            stage["params"] = {{"scheme", scheme_json(*cfg.scheme)}};
            stage["inputs"] = ordered_json::array(
                {input_entry(cfg, cfg.harness->layers), input_entry(cfg, cfg.harness->eval)});
            stage["outputs"] = ordered_json::array({outputs.write("report.json", report.dump(2) + "\n")});
            manifest["stages"].push_back(stage);
        });
    }

    run_stage("manifest", outputs, [&] { outputs.write("manifest.json", manifest.dump(2) + "\n"); });
    return manifest;
}

ComparisonReport compare_selections(const PipelineConfig & cfg, std::size_t trials) {
    if (!cfg.harness || !cfg.scheme) {
        throw ArgumentError("compare needs 'harness' and 'scheme' sections");
    }
    if (trials == 0) {
        throw ArgumentError("compare needs at least one trial");
    }
    const auto cand_path = cfg.harness->candidates ? *cfg.harness->candidates
                                                   : (cfg.activations ? *cfg.activations : fs::path());
    if (cand_path.empty()) {
        throw ArgumentError("compare needs candidate activations (harness.candidates or activations)");
    }
    const auto candidates = read_activations(cfg.resolve(cand_path));
    const auto layers = read_layer_bank(cfg.resolve(cfg.harness->layers));
    const auto eval = read_activations(cfg.resolve(cfg.harness->eval));
    if (layers.empty()) {
        throw ArgumentError("compare: layer bank is empty");
    }

    ComparisonReport rep;
    rep.k = cfg.kmeans.k;
    const auto cola = select_samples(candidates, cfg.projection_dim, cfg.kmeans, stage_seed(cfg, k_stage_select_samples));
    rep.cola_selection = cola.selected_ids;
    rep.cola_errors = evaluate_calibration(layers, candidates, cola.selected_ids, *cfg.scheme, eval);
    auto mean_of = [](const std::vector<double> & v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    rep.cola_mean = mean_of(rep.cola_errors);

    const std::uint64_t base = stage_seed(cfg, "compare:random");
    rep.trials.resize(trials);
    parallel_for(trials, [&](std::size_t t) {
        ComparisonTrial & tr = rep.trials[t];
        tr.trial = t;
        tr.seed = derive_seed(base, static_cast<std::uint64_t>(t));
        CounterRng rng(tr.seed);
        auto rows = sample_without_replacement(candidates.rows(), cola.selected_ids.size(), rng);
        std::sort(rows.begin(), rows.end());
        std::vector<std::string> ids;
        for (auto r : rows) {
            ids.push_back(candidates.sample_ids()[r]);
        }
        tr.random_errors = evaluate_calibration(layers, candidates, ids, *cfg.scheme, eval);
        tr.random_mean = mean_of(tr.random_errors);
        tr.cola_wins = rep.cola_mean <= tr.random_mean;
    });
    std::size_t wins = 0;
    for (const auto & tr : rep.trials) {
        rep.random_mean += tr.random_mean;
        wins += tr.cola_wins ? 1 : 0;
    }
    rep.random_mean /= static_cast<double>(trials);
    rep.win_rate = static_cast<double>(wins) / static_cast<double>(trials);
    return rep;
}

ordered_json to_json(const ComparisonReport & r) {
    ordered_json j;
    j["k"] = r.k;
    j["cola"] = {{"mean", r.cola_mean}, {"per_layer", r.cola_errors}, {"selected_ids", r.cola_selection}};
    j["trials"] = ordered_json::array();
    for (const auto & t : r.trials) {
        j["trials"].push_back({{"trial", t.trial},
                               {"seed", t.seed},
                               {"random_mean", t.random_mean},
                               {"random_per_layer", t.random_errors},
                               {"cola_wins", t.cola_wins}});
    }
    j["random_mean"] = r.random_mean;
    j["cola_mean"] = r.cola_mean;
    j["win_rate"] = r.win_rate;
    return j;
}

} // namespace cola
