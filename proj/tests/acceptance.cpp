// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "cola/activation_selection.hpp"
#include "cola/compression.hpp"
#include "cola/coverage.hpp"
#include "cola/pipeline.hpp"
#include "cola/spectral.hpp"
#include "cola/synthetic.hpp"
#include "pipeline_fixture.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>

#ifndef COLA_CLI_PATH
#error "COLA_CLI_PATH must point at the cola executable"
#endif

using namespace cola;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void report(const std::string & name, const std::function<Outcome()> & fn) {
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception & e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    g_failures += o.pass ? 0 : 1;
}

int run_cli(const std::string & args) {
    const std::string cmd = std::string("\"") + COLA_CLI_PATH + "\" " + args;
    return std::system(cmd.c_str());
}

std::string fmt(const char * f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Outcome curated_vs_random() {
    test::TempDir dir("accept-cmp");
    SyntheticConfig sc;
    sc.seed = 2024;
    const auto data = generate_synthetic(sc);
    if (data.candidates.cols() != 512 || data.candidates.num_layers() != 4 || data.layers.size() != 16 ||
        data.layers[0].rows() != 64 || data.layers[0].cols() != 128 || data.candidates.rows() != 1000) {
        return {false, "synthetic fixture has unexpected shape"};
    }
    write_activations(data.candidates, dir / "candidates.cola");
    write_activations(data.eval, dir / "eval.cola");
    write_layer_bank(data.layers, dir / "layers.cola");
    const nlohmann::json cfg = {
        {"seed", 7},
        {"activations", "candidates.cola"},
        {"projection", {{"dim", 64}}},
        {"kmeans", {{"k", 64}}},
        {"harness", {{"layers", "layers.cola"}, {"eval", "eval.cola"}}},
        {"scheme", {{"kind", "reconstruct_prune"}, {"sparsity", 0.5}}},
    };
    write_file(dir / "config.json", cfg.dump(2));

    const auto t0 = std::chrono::steady_clock::now();
    const int rc = run_cli("compare --config \"" + (dir / "config.json").string() + "\" --trials 20 --out \"" +
                           (dir / "report.json").string() + "\" > /dev/null");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rc != 0) {
        return {false, "cola compare exited with " + std::to_string(rc)};
    }
    const auto rep = read_json(dir / "report.json");
    std::size_t wins = 0;
    for (const auto & t : rep.at("trials")) {
        wins += rep.at("cola").at("mean").get<double>() <= t.at("random_mean").get<double>();
    }
    const double cola_mean = rep.at("cola_mean");
    const double random_mean = rep.at("random_mean");
    const double rate = static_cast<double>(wins) / static_cast<double>(rep.at("trials").size());
    const bool ok = rep.at("trials").size() == 20 && rep.at("cola").at("selected_ids").size() == 64 && rate >= 0.7 &&
                    cola_mean < random_mean && secs < 120.0;
    return {ok, fmt("win rate %.2f, curated mean %.4f vs random mean %.4f", rate, cola_mean, random_mean) +
                    fmt(", %.1f s", secs)};
}

Outcome reconstruction_oracle() {
    std::mt19937_64 gen(101);
    std::uniform_int_distribution<long> rc(1, 32), mc(1, 16);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
        const long r = rc(gen), c = rc(gen), m = mc(gen);
        const Matrix w = test::random_matrix(r, c, gen);
        const Matrix w2 = test::random_matrix(r, c, gen);
        const Matrix x = test::random_matrix(c, m, gen);
        const double got = reconstruction_error({"a", w}, {"b", w2}, CalibrationBatch{x});
        worst = std::max(worst, std::abs(got - test::naive_reconstruction_error(w, w2, x)));
    }
    return {worst <= 1e-10, fmt("max deviation %.3g over 50 shapes", worst)};
}

Outcome coverage_identities() {
    std::mt19937_64 gen(202);
    double worst_kl = 0.0;
    for (int i = 0; i < 100; ++i) {
        std::uniform_int_distribution<std::size_t> n(2, 500);
        const auto p = test::random_distribution(n(gen), gen);
        worst_kl = std::max(worst_kl, kl_divergence(p, p));
    }
    const HashingEmbeddingProvider provider(256);
    CoverageOptions opts;
    opts.alpha = 0.6;
    double worst_cov = 0.0;
    const char * words[] = {"river", "stone", "graph", "theorem", "token", "prime", "vector", "cloud", "seed", "lemma"};
    for (int d = 0; d < 10; ++d) {
        Dataset ds;
        ds.name = "d" + std::to_string(d);
        std::uniform_int_distribution<int> w(0, 9), len(3, 20);
        for (int i = 0; i < 8; ++i) {
            Sample s;
            s.id = std::to_string(i);
            const int l = len(gen);
            for (int k = 0; k < l; ++k) s.text += std::string(k ? " " : "") + words[w(gen)];
            ds.samples.push_back(s);
        }
        ds = with_fallback_tokens(ds, opts.vocab_size);
        const CapabilitySpec cap{"self", 1.0, ds};
        worst_cov = std::max(worst_cov, std::abs(coverage(ds, cap, provider, opts).combined - 1.0));
    }
    return {worst_kl <= 1e-9 && worst_cov <= 1e-9,
            fmt("max |coverage(self)-1| %.3g, max KL(p,p) %.3g", worst_cov, worst_kl)};
}

Outcome stage3_defaults() {
    std::mt19937_64 gen(303);
    const Matrix rows = test::random_matrix(400, 512, gen);
    std::vector<std::string> ids;
    for (int i = 0; i < 400; ++i) ids.push_back("c" + std::to_string(i));
    const ActivationMatrix store(ids, {128, 128, 128, 128}, rows);
    KMeansConfig cfg; // k = 128
    const auto res = select_samples(store, 64, cfg, 9);
    const std::set<std::string> uniq(res.selected_ids.begin(), res.selected_ids.end());
    const bool ok = cfg.k == 128 && res.selected_ids.size() == 128 && uniq.size() == 128 && res.centroids.cols() == 64;
    return {ok, std::to_string(res.selected_ids.size()) + " ids selected (" + std::to_string(uniq.size()) + " unique)"};
}

Outcome jl_property() {
    double worst = 1.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::mt19937_64 gen(1000 + seed);
        const Matrix rows = test::random_matrix(200, 4096, gen);
        const Matrix p = project(rows, make_projection(4096, 64, seed));
        std::size_t ok = 0, total = 0;
        for (long i = 0; i < 200; ++i) {
            for (long j = i + 1; j < 200; ++j) {
                const double a = std::sqrt(test::squared_distance(rows, i, rows, j));
                const double b = std::sqrt(test::squared_distance(p, i, p, j));
                ok += std::abs(b / a - 1.0) <= 0.3;
                ++total;
            }
        }
        worst = std::min(worst, static_cast<double>(ok) / static_cast<double>(total));
    }
    return {worst >= 0.95, fmt("worst seed keeps %.4f of pairs within 30%%", worst)};
}

Outcome kmeans_recovery() {
    int recovered = 0, monotone = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto blobs = gaussian_blobs(3, 40, 8, 10.0, 1.0, 500 + s);
        KMeansConfig cfg;
        cfg.k = 3;
        cfg.seed = s;
        const auto res = kmeans(blobs.points, cfg);
        recovered += test::same_partition(res.assignments, blobs.labels);
        bool mono = true;
        for (const auto & h : res.inertia_history)
            for (std::size_t t = 1; t < h.size(); ++t) mono = mono && h[t] <= h[t - 1] + 1e-9 * h[t - 1];
        monotone += mono;
    }
    return {recovered == 20 && monotone == 20,
            std::to_string(recovered) + "/20 recovered, " + std::to_string(monotone) + "/20 monotone"};
}

Outcome block_contract() {
    std::mt19937_64 gen(404);
    std::uniform_int_distribution<long> rows(1, 24), blocks(1, 8), m(1, 12);
    std::size_t bad = 0, checked = 0;
    for (int l = 0; l < 100; ++l) {
        const long r = rows(gen), c = 8 * blocks(gen);
        const LinearLayer layer{"l", test::random_matrix(r, c, gen)};
        const auto out = wanda_prune(layer, CalibrationBatch{test::random_matrix(c, m(gen), gen)}, BlockPattern{4, 8});
        for (long i = 0; i < r; ++i) {
            for (long b = 0; b < c; b += 8) {
                int zeros = 0;
                for (long j = b; j < b + 8; ++j) zeros += out.weights(i, j) == 0.0;
                bad += zeros != 4;
                ++checked;
            }
        }
    }
    return {bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) + " blocks hold exactly 4 zeros"};
}

Outcome quantizer_bound() {
    std::mt19937_64 gen(505);
    std::uniform_int_distribution<long> rows(1, 24), cols(1, 64);
    std::uniform_int_distribution<int> gs(0, 3);
    std::size_t bad = 0, groups = 0;
    for (int l = 0; l < 100; ++l) {
        std::optional<std::uint32_t> group;
        if (const int g = gs(gen); g > 0) group = static_cast<std::uint32_t>(4 << g);
        const long r = rows(gen), c = group ? static_cast<long>(*group) * (1 + cols(gen) % 4) : cols(gen);
        const Matrix w = test::random_matrix(r, c, gen);
        const auto q = rtn_quantize({"l", w}, 4, group);
        const Matrix s = rtn_scales(w, 4, group);
        const long gl = group ? static_cast<long>(*group) : c;
        for (long i = 0; i < r; ++i) {
            for (long g = 0; g < s.cols(); ++g) {
                const double scale = s(i, g);
                for (long j = g * gl; j < std::min(c, (g + 1) * gl); ++j) {
                    bad += std::abs(q.weights(i, j) - w(i, j)) > scale / 2.0;
                }
                ++groups;
            }
        }
    }
    return {bad == 0, std::to_string(groups) + " groups checked, " + std::to_string(bad) + " violations"};
}

Outcome spectral_parseval() {
    std::mt19937_64 gen(606);
    std::uniform_int_distribution<long> rows(1, 16), cols(2, 64);
    double worst_part = 0.0, worst_dft = 0.0;
    for (int l = 0; l < 100; ++l) {
        const long r = rows(gen), c = cols(gen);
        const Matrix w = test::random_matrix(r, c, gen);
        const auto s = weight_spectrum({"l", w});
        double total = 0.0;
        for (double m : s.magnitude) total += m * m;
        const auto b = band_energies(s);
        worst_part = std::max(worst_part, std::abs(b.energy[0] + b.energy[1] + b.energy[2] - total) / total);
        const auto oracle = test::naive_dft_magnitudes(w);
        for (std::size_t j = 0; j < oracle.size(); ++j) {
            worst_dft = std::max(worst_dft, std::abs(s.magnitude[j] - oracle[j]) / std::max(1.0, oracle[j]));
        }
    }
    return {worst_part <= 1e-9 && worst_dft <= 1e-8,
            fmt("partition rel. error %.3g, DFT vs oracle %.3g", worst_part, worst_dft)};
}

Outcome run_determinism() {
    test::TempDir dir("accept-run");
    const auto fx = test::write_pipeline_fixture(dir.path(), true);
    const std::string args = "run --config \"" + fx.config.string() + "\" > /dev/null";
    if (run_cli(args) != 0) return {false, "first cola run failed"};
    const auto first = read_file(dir / "out/manifest.json");
    std::filesystem::remove_all(dir / "out");
    if (run_cli(args) != 0) return {false, "second cola run failed"};
    const auto second = read_file(dir / "out/manifest.json");
    return {first == second && !first.empty(), "manifest sha256 " + sha256_hex(first).substr(0, 16) + " vs " +
                                                   sha256_hex(second).substr(0, 16)};
}

} // namespace

int main() {
    report("curated selection beats random (20 trials, k=64, reconstruct_prune 50%)", curated_vs_random);
    report("reconstruction error matches triple-loop oracle", reconstruction_oracle);
    report("coverage(self)=1 at alpha 0.6 and KL(p,p)~0", coverage_identities);
    report("d=64, k=128 yields 128 selected ids", stage3_defaults);
    report("random projection preserves 95% of distances within 30%", jl_property);
    report("k-means recovers 3 separated blobs with monotone inertia", kmeans_recovery);
    report("4:8 block pattern holds over 100 layers", block_contract);
    report("4-bit round-to-nearest error within half a step", quantizer_bound);
    report("band energies partition total energy and DFT matches oracle", spectral_parseval);
    report("two cola run invocations give identical manifests", run_determinism);
    std::printf("%d failure(s)\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
