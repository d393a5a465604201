#include "cola/coverage.hpp"
#include "cola/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>

using namespace cola;

namespace {

Dataset text_dataset(const std::string & name, const std::vector<std::string> & words, std::size_t n,
                     std::size_t len, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    Dataset d;
    d.name = name;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        for (std::size_t w = 0; w < len; ++w) {
            if (w) text += ' ';
            text += words[pick(gen)];
        }
        d.samples.push_back(test::make_sample(name + "-" + std::to_string(i), {}, std::nullopt, text));
    }
    return with_fallback_tokens(std::move(d), 4096);
}

std::vector<std::string> vocab(const std::string & prefix, int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
    return v;
}

// Maps "+..." texts to e1 and "-..." texts to -e1.
class SignProvider : public EmbeddingProvider {
public:
    std::string name() const override { return "sign"; }
    std::size_t dim() const override { return 2; }
    std::vector<double> embed(std::string_view text) const override {
        return {text.front() == '-' ? -1.0 : 1.0, 0.0};
    }
};

CoverageOptions small_opts() {
    CoverageOptions o;
    o.vocab_size = 4096;
    return o;
}

} // namespace

TEST_CASE("kl_divergence identities and hand values") {
    CHECK(kl_divergence({0.5, 0.5}, {0.5, 0.5}) == 0.0);
    CHECK(std::abs(kl_divergence({1.0, 0.0}, {0.5, 0.5}, 1e-9) - std::log(2.0)) < 1e-6);
}

TEST_CASE("kl_divergence matches a summation oracle") {
    std::mt19937_64 gen(5);
    for (int r = 0; r < 20; ++r) {
        const auto p = test::random_distribution(100, gen);
        const auto q = test::random_distribution(100, gen);
        CHECK(std::abs(kl_divergence(p, q, 1e-9) - test::naive_kl(p, q, 1e-9)) < 1e-10);
        CHECK(kl_divergence(p, p, 1e-9) <= 1e-9);
    }
    CHECK_THROWS_AS(kl_divergence({0.5, 0.5}, {1.0}), ShapeError);
}

TEST_CASE("emb_sim self, antipodal and centroid oracle") {
    const auto words = vocab("w", 60);
    const auto a = text_dataset("a", words, 10, 12, 1);
    const auto b = text_dataset("b", words, 10, 12, 2);
    const HashingEmbeddingProvider provider(256);
    CHECK(std::abs(emb_sim(a, a, provider) - 1.0) < 1e-9);

    Dataset pos, neg;
    pos.samples = {test::make_sample("p1", {1}, {}, "+x"), test::make_sample("p2", {1}, {}, "+y")};
    neg.samples = {test::make_sample("n1", {1}, {}, "-x")};
    CHECK(emb_sim(pos, neg, SignProvider{}) == -1.0);

    // centroid cosine computed independently
    std::vector<double> ca(256, 0.0), cb(256, 0.0);
    for (const auto & s : a.samples) {
        const auto e = provider.embed(s.text);
        for (int k = 0; k < 256; ++k) ca[k] += e[k];
    }
    for (const auto & s : b.samples) {
        const auto e = provider.embed(s.text);
        for (int k = 0; k < 256; ++k) cb[k] += e[k];
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int k = 0; k < 256; ++k) {
        dot += ca[k] * cb[k];
        na += ca[k] * ca[k];
        nb += cb[k] * cb[k];
    }
    const double oracle = dot / std::sqrt(na * nb);
    CHECK(std::abs(emb_sim(a, b, provider) - oracle) < 1e-10);
}

TEST_CASE("hashing embeddings are unit vectors") {
    const HashingEmbeddingProvider provider(64);
    const auto e = provider.embed("the quick brown fox jumps");
    double n2 = 0.0;
    for (double x : e) n2 += x * x;
    CHECK(std::abs(n2 - 1.0) < 1e-12);
    CHECK(provider.embed("") == std::vector<double>(64, 0.0));
}

TEST_CASE("coverage self, alpha one and disjoint vocabularies") {
    const auto a = text_dataset("a", vocab("alpha", 40), 12, 10, 3);
    const auto b = text_dataset("b", vocab("beta", 40), 12, 10, 4);
    const HashingEmbeddingProvider provider(256);
    auto opts = small_opts();

    const CapabilitySpec cap_a{"a", 1.0, a};
    const CapabilitySpec cap_b{"b", 1.0, b};
    CHECK(std::abs(coverage(a, cap_a, provider, opts).combined - 1.0) < 1e-9);

    opts.alpha = 1.0;
    const auto s = coverage(b, cap_a, provider, opts);
    CHECK(s.combined == s.emb_sim);

    opts.alpha = 0.6;
    const double cross = coverage(b, cap_a, provider, opts).combined;
    CHECK(cross < coverage(a, cap_a, provider, opts).combined);
    CHECK(cross < coverage(b, cap_b, provider, opts).combined);

    opts.kl_mode = KlMode::raw;
    const auto raw = coverage(b, cap_a, provider, opts);
    CHECK(raw.combined == doctest::Approx(0.6 * raw.emb_sim + 0.4 * raw.kl));
}

TEST_CASE("coverage ignores sample order") {
    auto a = text_dataset("a", vocab("w", 30), 15, 8, 8);
    const auto ref = text_dataset("r", vocab("w", 30), 15, 8, 9);
    const HashingEmbeddingProvider provider(256);
    const CapabilitySpec cap{"r", 1.0, ref};
    for (auto mode : {EmbSimMode::centroid, EmbSimMode::pairwise}) {
        auto opts = small_opts();
        opts.embsim_mode = mode;
        const double before = coverage(a, cap, provider, opts).combined;
        auto shuffled = a;
        std::mt19937_64 gen(1);
        std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), gen);
        std::reverse(shuffled.samples.begin(), shuffled.samples.end());
        CHECK(coverage(shuffled, cap, provider, opts).combined == before);
    }
}

TEST_CASE("select_datasets trivial budgets") {
    const auto a = text_dataset("a", vocab("a", 20), 5, 6, 1);
    const auto b = text_dataset("b", vocab("b", 20), 5, 6, 2);
    const auto c = text_dataset("c", vocab("c", 20), 5, 6, 3);
    const HashingEmbeddingProvider provider(128);
    const std::vector<CapabilitySpec> caps{{"x", 1.0, text_dataset("x", vocab("b", 20), 5, 6, 9)}};

    auto one = select_datasets({a}, caps, 1, provider, small_opts());
    REQUIRE(one.size() == 1);
    CHECK(one[0].name == "a");

    auto all = select_datasets({a, b, c}, caps, 3, provider, small_opts());
    REQUIRE(all.size() == 3);
    CHECK(all[0].name == "b");
    std::vector<std::string> names;
    for (const auto & p : all) names.push_back(p.name);
    std::sort(names.begin(), names.end());
    CHECK(names == std::vector<std::string>{"a", "b", "c"});

    CHECK_THROWS_AS(select_datasets({a}, caps, 2, provider, small_opts()), ArgumentError);
}

TEST_CASE("greedy agrees with exhaustive search over pairs") {
    const auto wa = vocab("math", 40);
    const auto wb = vocab("code", 40);
    auto wab = wa;
    wab.insert(wab.end(), wb.begin(), wb.end());
    const std::vector<Dataset> pool{
        text_dataset("math", wa, 10, 10, 21),
        text_dataset("code", wb, 10, 10, 22),
        text_dataset("noise", vocab("zz", 40), 10, 10, 23),
        text_dataset("mixed", wab, 10, 10, 24),
    };
    const std::vector<CapabilitySpec> caps{
        {"math", 2.0, text_dataset("ref-math", wa, 10, 10, 31)},
        {"code", 1.0, text_dataset("ref-code", wb, 10, 10, 32)},
    };
    const HashingEmbeddingProvider provider(256);
    const auto opts = small_opts();

    double best = -1e300;
    std::pair<std::size_t, std::size_t> best_pair;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            const double v = weighted_coverage({&pool[i], &pool[j]}, caps, provider, opts);
            if (v > best) {
                best = v;
                best_pair = {i, j};
            }
        }
    }
    const auto picks = select_datasets(pool, caps, 2, provider, opts);
    REQUIRE(picks.size() == 2);
    std::vector<std::size_t> got{picks[0].pool_index, picks[1].pool_index};
    std::sort(got.begin(), got.end());
    CHECK(got == std::vector<std::size_t>{best_pair.first, best_pair.second});
    CHECK(std::abs(picks[1].objective - best) < 1e-12);
    CHECK(std::abs(picks[0].marginal_gain + picks[1].marginal_gain - best) < 1e-12);
}

TEST_CASE("a dominant capability's reference is picked first") {
    const auto ref = text_dataset("ref", vocab("r", 30), 8, 10, 40);
    const std::vector<Dataset> pool{
        text_dataset("p0", vocab("r", 60), 8, 10, 41),
        text_dataset("p1", vocab("q", 30), 8, 10, 42),
        ref,
        text_dataset("p3", vocab("s", 30), 8, 10, 43),
    };
    const std::vector<CapabilitySpec> caps{
        {"main", 10.0, ref},
        {"side", 1.0, text_dataset("side", vocab("q", 30), 8, 10, 44)},
    };
    const HashingEmbeddingProvider provider(256);
    const auto picks = select_datasets(pool, caps, 1, provider, small_opts());
    CHECK(picks[0].pool_index == 2);
}

TEST_CASE("select_datasets is deterministic") {
    std::vector<Dataset> pool;
    for (int i = 0; i < 5; ++i) pool.push_back(text_dataset("d" + std::to_string(i), vocab("w", 50), 6, 8, 50 + i));
    const std::vector<CapabilitySpec> caps{{"c", 1.0, text_dataset("c", vocab("w", 25), 6, 8, 60)}};
    const HashingEmbeddingProvider provider(256);
    const auto a = select_datasets(pool, caps, 3, provider, small_opts());
    const auto b = select_datasets(pool, caps, 3, provider, small_opts());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pool_index == b[i].pool_index);
        CHECK(a[i].objective == b[i].objective);
    }
}
