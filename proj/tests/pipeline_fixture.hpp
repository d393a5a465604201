#pragma once

#include "cola/compression.hpp"
#include "cola/data_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <random>
#include <string>

namespace test {

struct PipelineFixture {
    std::filesystem::path config;
    std::size_t n_samples = 0;
};

// Two small pool datasets, one capability reference, an activation store
// covering every pool sample, a layer bank and an eval store. With
// `with_harness` the config also evaluates a 50% reconstruct_prune scheme.
inline PipelineFixture write_pipeline_fixture(const std::filesystem::path & dir, bool with_harness) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "data");
    const char * words[2][6] = {{"apple", "pear", "plum", "fig", "lime", "kiwi"},
                                {"loop", "array", "branch", "stack", "queue", "heap"}};
    std::mt19937_64 gen(17);
    std::vector<std::string> ids;
    for (int p = 0; p < 2; ++p) {
        cola::Dataset d;
        d.name = "pool" + std::to_string(p);
        for (int i = 0; i < 6; ++i) {
            cola::Sample s;
            s.id = d.name + "-" + std::to_string(i);
            for (int w = 0; w < 8; ++w) {
                if (w) s.text += ' ';
                s.text += words[p][(i + w * 5) % 6];
            }
            s.difficulty = (i % 3) / 3.0 + 0.1;
            ids.push_back(s.id);
            d.samples.push_back(s);
        }
        cola::save_dataset(d, dir / "data" / (d.name + ".jsonl"));
    }
    cola::Dataset ref;
    ref.name = "ref";
    cola::Sample r;
    r.id = "ref-0";
    r.text = "apple pear loop stack";
    ref.samples.push_back(r);
    cola::save_dataset(ref, dir / "data" / "ref.jsonl");

    std::normal_distribution<double> nd(0.0, 1.0);
    cola::Matrix acts(static_cast<long>(ids.size()), 8);
    for (long i = 0; i < acts.rows(); ++i)
        for (long j = 0; j < 8; ++j) acts(i, j) = nd(gen);
    cola::write_activations(cola::ActivationMatrix(ids, {4, 4}, acts), dir / "data" / "acts.cola");

    nlohmann::json cfg = {
        {"seed", 1234},
        {"vocab_size", 512},
        {"output_dir", "out"},
        {"pool", {"data/pool0.jsonl", "data/pool1.jsonl"}},
        {"capabilities", {{"mixed", {{"weight", 1.0}, {"reference", "data/ref.jsonl"}}}}},
        {"budget", 2},
        {"embedding_dim", 64},
        {"processing", {{"target_length", 0}, {"min_length", 0}}},
        {"activations", "data/acts.cola"},
        {"projection", {{"dim", 4}}},
        {"kmeans", {{"k", ids.size()}, {"restarts", 3}}},
    };
    if (with_harness) {
        std::vector<cola::LinearLayer> layers;
        for (int l = 0; l < 2; ++l) {
            cola::Matrix w(3, 4);
            for (long i = 0; i < 3; ++i)
                for (long j = 0; j < 4; ++j) w(i, j) = nd(gen);
            layers.push_back({"layer-" + std::to_string(l), w});
        }
        cola::write_layer_bank(layers, dir / "data" / "layers.cola");
        cola::Matrix ev(5, 8);
        for (long i = 0; i < 5; ++i)
            for (long j = 0; j < 8; ++j) ev(i, j) = nd(gen);
        cola::write_activations(cola::ActivationMatrix({"e0", "e1", "e2", "e3", "e4"}, {4, 4}, ev),
                                dir / "data" / "eval.cola");
        cfg["kmeans"]["k"] = 4;
        cfg["processing"]["mix"] = {0.5, 0.25, 0.25};
        cfg["processing"]["count"] = 8;
        cfg["harness"] = {{"layers", "data/layers.cola"}, {"eval", "data/eval.cola"}};
        cfg["scheme"] = {{"kind", "reconstruct_prune"}, {"sparsity", 0.5}};
    }
    cola::write_file(dir / "config.json", cfg.dump(2) + "\n");
    return {dir / "config.json", ids.size()};
}

} // namespace test
