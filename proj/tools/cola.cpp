// cola: calibration-data curation and layer-wise compression harness.

#include "cola/activation_selection.hpp"
#include "cola/compression.hpp"
#include "cola/coverage.hpp"
#include "cola/errors.hpp"
#include "cola/pipeline.hpp"
#include "cola/processing.hpp"
#include "cola/rng.hpp"
#include "cola/spectral.hpp"
#include "cola/synthetic.hpp"

#include <CLI11.hpp>

#include <glob.h>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<fs::path> expand_glob(const std::string & pattern) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<fs::path> out;
    if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) {
            out.emplace_back(g.gl_pathv[i]);
        }
    }
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) {
        throw cola::IoError("glob failed for '" + pattern + "'");
    }
    return out; // glob(3) sorts matches
}

void emit(const std::string & out_path, const std::string & text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        cola::write_file(out_path, text);
    }
}

cola::TierMix parse_mix(const std::string & s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        v.push_back(std::stod(item));
    }
    if (v.size() != 3) {
        throw cola::ArgumentError("--mix expects three comma-separated weights e,m,h");
    }
    return {v[0], v[1], v[2]};
}

} // namespace

int main(int argc, char ** argv) {
    CLI::App app{"cola - calibration data curation toolkit"};
    app.require_subcommand(1);

    // select-datasets
    auto * sd = app.add_subcommand("select-datasets", "Greedy dataset selection by weighted capability coverage");
    std::vector<std::string> sd_pool;
    std::string sd_caps, sd_out, sd_kl = "exp-neg", sd_embsim = "centroid";
    std::size_t sd_budget = 1, sd_dim = 256;
    double sd_alpha = 0.6;
    std::uint32_t sd_vocab = 32000;
    sd->add_option("--pool", sd_pool, "Glob(s) of candidate JSONL datasets")->required();
    sd->add_option("--capabilities", sd_caps, "caps.json: capability -> {weight, reference_path}")->required();
    sd->add_option("--budget", sd_budget, "Number of datasets to select")->required();
    sd->add_option("--alpha", sd_alpha, "Embedding-similarity weight")->check(CLI::Range(0.0, 1.0));
    sd->add_option("--kl-mode", sd_kl, "exp-neg or raw")->check(CLI::IsMember({"exp-neg", "raw"}));
    sd->add_option("--embsim-mode", sd_embsim, "centroid or pairwise")->check(CLI::IsMember({"centroid", "pairwise"}));
    sd->add_option("--vocab-size", sd_vocab, "Vocabulary size for token distributions");
    sd->add_option("--embedding-dim", sd_dim, "Hashing embedding dimension");
    sd->add_option("--out", sd_out, "Output JSON (stdout when omitted)");

    // process
    auto * pr = app.add_subcommand("process", "Filter, wrap, mix and chunk a dataset");
    std::string pr_in, pr_out, pr_format = "passthrough", pr_mix;
    std::uint32_t pr_target = 2048, pr_min = 256, pr_vocab = 32000;
    std::optional<std::size_t> pr_count;
    std::uint64_t pr_seed = 0;
    pr->add_option("--in", pr_in, "Input JSONL")->required();
    pr->add_option("--out", pr_out, "Output JSONL")->required();
    pr->add_option("--target-length", pr_target, "Chunk length in tokens (0 disables chunking)");
    pr->add_option("--min-length", pr_min, "Minimum sample length in tokens");
    pr->add_option("--format", pr_format, "passthrough or wrap-qa")->check(CLI::IsMember({"passthrough", "wrap-qa"}));
    pr->add_option("--mix", pr_mix, "Difficulty mix e,m,h (requires --count)");
    pr->add_option("--count", pr_count, "Number of samples to draw with the difficulty mix");
    pr->add_option("--seed", pr_seed, "Seed");
    pr->add_option("--vocab-size", pr_vocab, "Vocabulary for the fallback tokenizer");

    // select-samples
    auto * ss = app.add_subcommand("select-samples", "Random projection + k-means representative selection");
    std::string ss_acts, ss_out;
    cola::KMeansConfig ss_km;
    std::size_t ss_dim = 64;
    std::uint64_t ss_seed = 0;
    ss->add_option("--activations", ss_acts, "Activation file (.cola)")->required();
    ss->add_option("--k", ss_km.k, "Number of clusters / selected samples");
    ss->add_option("--dim", ss_dim, "Projected dimension");
    ss->add_option("--seed", ss_seed, "Master seed");
    ss->add_option("--max-iters", ss_km.max_iters, "Lloyd iterations per restart");
    ss->add_option("--restarts", ss_km.n_restarts, "k-means restarts");
    ss->add_option("--tol", ss_km.tol, "Relative inertia tolerance");
    ss->add_option("--out", ss_out, "Output selection JSON (stdout when omitted)");

    // harness
    auto * hs = app.add_subcommand("harness", "Compress layers with selected calibration rows and score them");
    std::string hs_layers, hs_acts, hs_sel, hs_scheme, hs_eval, hs_out;
    hs->add_option("--layers", hs_layers, "Layer bank (.cola)")->required();
    hs->add_option("--acts", hs_acts, "Calibration activation store (.cola)")->required();
    hs->add_option("--selection", hs_sel, "Selection JSON")->required();
    hs->add_option("--scheme", hs_scheme, "Compression scheme JSON")->required();
    hs->add_option("--eval", hs_eval, "Held-out activation store (.cola)")->required();
    hs->add_option("--out", hs_out, "Report JSON (stdout when omitted)");

    // spectrum
    auto * sp = app.add_subcommand("spectrum", "Frequency-band analysis of layer weights");
    std::string sp_orig, sp_comp, sp_out;
    sp->add_option("--original", sp_orig, "Original layer bank")->required();
    sp->add_option("--compressed", sp_comp, "Compressed layer bank");
    sp->add_option("--out", sp_out, "Report JSON (stdout when omitted)");

    // compress (convenience: write a compressed bank for `spectrum`)
    auto * cp = app.add_subcommand("compress", "Write a compressed copy of a layer bank");
    std::string cp_layers, cp_acts, cp_sel, cp_scheme, cp_out;
    cp->add_option("--layers", cp_layers, "Layer bank")->required();
    cp->add_option("--scheme", cp_scheme, "Compression scheme JSON")->required();
    cp->add_option("--acts", cp_acts, "Calibration activation store (needed by data-aware schemes)");
    cp->add_option("--selection", cp_sel, "Selection JSON restricting calibration rows");
    cp->add_option("--out", cp_out, "Output layer bank")->required();

    // run / compare
    auto * rn = app.add_subcommand("run", "Run the full curation pipeline from a config");
    std::string rn_cfg;
    rn->add_option("--config", rn_cfg, "Pipeline config JSON")->required();

    auto * cm = app.add_subcommand("compare", "Curated vs random calibration on the harness");
    std::string cm_cfg, cm_out;
    std::size_t cm_trials = 20;
    cm->add_option("--config", cm_cfg, "Pipeline config JSON")->required();
    cm->add_option("--trials", cm_trials, "Random-selection trials");
    cm->add_option("--out", cm_out, "Report JSON (summary printed to stdout)");

    // synth
    auto * sy = app.add_subcommand("synth", "Generate synthetic candidates, eval batch and layer bank");
    cola::SyntheticConfig sy_cfg;
    std::string sy_dir;
    sy->add_option("--out-dir", sy_dir, "Directory for candidates.cola, eval.cola, layers.cola")->required();
    sy->add_option("--seed", sy_cfg.seed, "Seed");
    sy->add_option("--candidates", sy_cfg.n_candidates, "Candidate rows");
    sy->add_option("--blobs", sy_cfg.n_blobs, "Number of blobs");
    sy->add_option("--layers", sy_cfg.n_layers, "Number of linear layers");
    sy->add_option("--layer-rows", sy_cfg.layer_rows, "Output channels per layer");
    sy->add_option("--eval-per-blob", sy_cfg.eval_per_blob, "Eval rows per blob");
    sy->add_option("--layer-dims", sy_cfg.layer_dims, "Activation segment widths");

    CLI11_PARSE(app, argc, argv);

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (*sd) {
            std::vector<cola::Dataset> pool;
            std::vector<fs::path> paths;
            for (const auto & g : sd_pool) {
                for (auto & p : expand_glob(g)) paths.push_back(std::move(p));
            }
            if (paths.empty()) {
                throw cola::ArgumentError("--pool matched no files");
            }
            for (const auto & p : paths) {
                pool.push_back(cola::with_fallback_tokens(cola::load_dataset(p), sd_vocab));
            }
            const fs::path caps_path(sd_caps);
            const auto caps_json = cola::read_json(caps_path);
            std::vector<cola::CapabilitySpec> caps;
            for (const auto & [name, spec] : caps_json.items()) {
                const std::string ref = spec.contains("reference_path") ? spec.at("reference_path").get<std::string>()
                                                                        : spec.at("reference").get<std::string>();
                const fs::path ref_path = fs::path(ref).is_absolute() ? fs::path(ref) : caps_path.parent_path() / ref;
                caps.push_back({name, spec.value("weight", 1.0),
                                cola::with_fallback_tokens(cola::load_dataset(ref_path), sd_vocab)});
            }
            cola::CoverageOptions opts;
            opts.alpha = sd_alpha;
            opts.vocab_size = sd_vocab;
            opts.kl_mode = cola::parse_kl_mode(sd_kl);
            opts.embsim_mode = cola::parse_embsim_mode(sd_embsim);
            const cola::HashingEmbeddingProvider provider(sd_dim);
            const auto picks = cola::select_datasets(pool, caps, sd_budget, provider, opts);
            ordered_json out = ordered_json::array();
            for (const auto & pk : picks) {
                out.push_back({{"name", pk.name},
                               {"path", paths[pk.pool_index].generic_string()},
                               {"marginal_gain", pk.marginal_gain},
                               {"objective", pk.objective}});
            }
            emit(sd_out, out.dump(2) + "\n");
        } else if (*pr) {
            cola::ProcessingConfig cfg;
            cfg.target_length = pr_target;
            cfg.min_length = pr_min;
            cfg.format_policy = cola::parse_format_policy(pr_format);
            cfg.seed = pr_seed;
            cfg.vocab_size = pr_vocab;
            if (!pr_mix.empty()) {
                cfg.difficulty_mix = parse_mix(pr_mix);
            }
            const auto out = cola::process_dataset(cola::load_dataset(pr_in), cfg, pr_count);
            cola::save_dataset(out, pr_out);
            std::cerr << "cola process: wrote " << out.samples.size() << " samples to " << pr_out << "\n";
        } else if (*ss) {
            const auto acts = cola::read_activations(ss_acts);
            const auto res = cola::select_samples(acts, ss_dim, ss_km, ss_seed);
            emit(ss_out, cola::to_json(res).dump(2) + "\n");
        } else if (*hs) {
            const auto layers = cola::read_layer_bank(hs_layers);
            const auto acts = cola::read_activations(hs_acts);
            const auto sel = cola::load_selection(hs_sel);
            const auto scheme = cola::scheme_from_json(cola::read_json(hs_scheme));
            const auto eval = cola::read_activations(hs_eval);
            const auto errors = cola::evaluate_calibration(layers, acts, sel.selected_ids, scheme, eval);
            ordered_json rep;
            rep["per_layer"] = ordered_json::array();
            double mean = 0.0;
            for (std::size_t l = 0; l < layers.size(); ++l) {
                rep["per_layer"].push_back({{"layer", layers[l].name}, {"error", errors[l]}});
                mean += errors[l];
            }
            rep["mean"] = layers.empty() ? 0.0 : mean / static_cast<double>(layers.size());
            emit(hs_out, rep.dump(2) + "\n");
        } else if (*sp) {
            const auto orig = cola::read_layer_bank(sp_orig);
            std::vector<cola::LinearLayer> comp;
            if (!sp_comp.empty()) {
                comp = cola::read_layer_bank(sp_comp);
                if (comp.size() != orig.size()) {
                    throw cola::ShapeError("original and compressed banks hold different layer counts");
                }
            }
            json out = json::array();
            for (std::size_t l = 0; l < orig.size(); ++l) {
                out.push_back(cola::to_json(cola::spectrum_report(orig[l], comp.empty() ? nullptr : &comp[l])));
            }
            emit(sp_out, out.dump(2) + "\n");
        } else if (*cp) {
            const auto layers = cola::read_layer_bank(cp_layers);
            const auto scheme = cola::scheme_from_json(cola::read_json(cp_scheme));
            std::vector<cola::LinearLayer> out;
            if (cp_acts.empty()) {
                const bool data_free = scheme.kind == cola::SchemeKind::magnitude_prune ||
                                       scheme.kind == cola::SchemeKind::rtn_quant;
                if (!data_free) {
                    throw cola::ArgumentError("scheme needs calibration activations (--acts)");
                }
                for (const auto & l : layers) {
                    out.push_back(cola::compress(l, cola::CalibrationBatch{}, scheme));
                }
            } else {
                const auto acts = cola::read_activations(cp_acts);
                std::vector<std::size_t> rows;
                if (cp_sel.empty()) {
                    for (std::size_t i = 0; i < acts.rows(); ++i) rows.push_back(i);
                } else {
                    for (const auto & id : cola::load_selection(cp_sel).selected_ids) {
                        const auto r = acts.find(id);
                        if (!r) throw cola::LookupError("selected sample '" + id + "' not in activation store");
                        rows.push_back(*r);
                    }
                }
                for (std::size_t l = 0; l < layers.size(); ++l) {
                    const auto seg = cola::segment_for_layer(acts, l, layers[l]);
                    out.push_back(cola::compress(layers[l], cola::CalibrationBatch{acts.layer_columns(seg, rows)}, scheme));
                }
            }
            cola::write_layer_bank(out, cp_out);
        } else if (*rn) {
            const auto cfg = cola::load_pipeline_config(rn_cfg);
            const auto manifest = cola::run_pipeline(cfg);
            std::cout << "cola run: manifest written to "
                      << (cfg.resolve(cfg.output_dir) / "manifest.json").generic_string() << "\n";
        } else if (*cm) {
            const auto cfg = cola::load_pipeline_config(cm_cfg);
            const auto rep = cola::compare_selections(cfg, cm_trials);
            if (!cm_out.empty()) {
                cola::write_file(cm_out, cola::to_json(rep).dump(2) + "\n");
            }
            std::printf("k=%zu trials=%zu cola_mean=%.6f random_mean=%.6f win_rate=%.3f\n", rep.k, rep.trials.size(),
                        rep.cola_mean, rep.random_mean, rep.win_rate);
        } else if (*sy) {
            const auto data = cola::generate_synthetic(sy_cfg);
            const fs::path dir(sy_dir);
            cola::write_activations(data.candidates, dir / "candidates.cola");
            cola::write_activations(data.eval, dir / "eval.cola");
            cola::write_layer_bank(data.layers, dir / "layers.cola");
            json labels = json::object();
            for (std::size_t i = 0; i < data.candidate_blob.size(); ++i) {
                labels[data.candidates.sample_ids()[i]] = data.candidate_blob[i];
            }
            cola::write_file(dir / "labels.json", labels.dump() + "\n");
        }
    } catch (const cola::StageError & e) {
        std::cerr << "cola " << cmd << ": " << e.what() << "\n";
        return 2;
    } catch (const cola::Error & e) {
        std::cerr << "cola " << cmd << ": " << e.kind() << " error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception & e) {
        std::cerr << "cola " << cmd << ": error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
