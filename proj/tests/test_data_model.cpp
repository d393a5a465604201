#include "cola/data_model.hpp"
#include "cola/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <limits>

using namespace cola;

namespace {

std::string line_for(const std::string & id, const std::string & extra = "") {
    return R"({"id":")" + id + R"(","text":"hello world","domain":"language","language":"en","format":"raw")" + extra +
           "}\n";
}

} // namespace

TEST_CASE("load_dataset keeps order of valid lines") {
    test::TempDir dir("dm");
    write_file(dir / "three.jsonl", line_for("a") + line_for("b") + line_for("c"));
    const auto d = load_dataset(dir / "three.jsonl");
    REQUIRE(d.samples.size() == 3);
    CHECK(d.samples[0].id == "a");
    CHECK(d.samples[1].id == "b");
    CHECK(d.samples[2].id == "c");
    CHECK(d.name == "three");
}

TEST_CASE("empty file gives an empty dataset named after the file") {
    test::TempDir dir("dm");
    write_file(dir / "nothing.jsonl", "");
    const auto d = load_dataset(dir / "nothing.jsonl");
    CHECK(d.samples.empty());
    CHECK(d.name == "nothing");
}

TEST_CASE("duplicate id is reported at its second line") {
    test::TempDir dir("dm");
    write_file(dir / "dup.jsonl", line_for("s1") + line_for("s2") + line_for("s3") + line_for("s1"));
    try {
        load_dataset(dir / "dup.jsonl");
        FAIL("expected a validation error");
    } catch (const ValidationError & e) {
        const std::string msg = e.what();
        CHECK(msg.find(":4:") != std::string::npos);
        CHECK(msg.find("s1") != std::string::npos);
    }
}

TEST_CASE("sample validation rejects bad fields") {
    test::TempDir dir("dm");
    SUBCASE("negative token id") {
        write_file(dir / "neg.jsonl", line_for("a", R"(,"tokens":[1,-2,3])"));
        CHECK_THROWS_AS(load_dataset(dir / "neg.jsonl"), ValidationError);
    }
    SUBCASE("difficulty above one") {
        write_file(dir / "diff.jsonl", line_for("a", R"(,"difficulty":1.5)"));
        CHECK_THROWS_AS(load_dataset(dir / "diff.jsonl"), ValidationError);
    }
    SUBCASE("difficulty below zero") {
        auto s = test::make_sample("x", {1, 2}, -0.1);
        CHECK_THROWS_AS(validate(s), ValidationError);
    }
    SUBCASE("malformed json") {
        write_file(dir / "bad.jsonl", line_for("a") + "{not json\n");
        CHECK_THROWS_AS(load_dataset(dir / "bad.jsonl"), ParseError);
    }
}

TEST_CASE("dataset round-trips through jsonl") {
    test::TempDir dir("dm");
    Dataset d;
    d.name = "rt";
    d.samples.push_back(test::make_sample("a", {1, 2, 3}, 0.25, "first text"));
    d.samples.push_back(test::make_sample("b", {}, std::nullopt, "second \"quoted\" text"));
    d.samples[1].domain = Domain::math;
    d.samples[1].format = SampleFormat::qa_erc;
    d.samples[1].language = "de";
    save_dataset(d, dir / "rt.jsonl");
    const auto back = load_dataset(dir / "rt.jsonl");
    REQUIRE(back.samples.size() == 2);
    CHECK(back.samples[0] == d.samples[0]);
    CHECK(back.samples[1] == d.samples[1]);
}

TEST_CASE("token_distribution small cases") {
    Dataset d;
    d.samples.push_back(test::make_sample("a", {0, 0, 1}));
    auto p = token_distribution(d, 2);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));

    Dataset e;
    e.samples.push_back(test::make_sample("a", {0}));
    e.samples.push_back(test::make_sample("b", {1}));
    p = token_distribution(e, 2);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
}

TEST_CASE("token_distribution matches a counting oracle") {
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<std::uint32_t> tok(0, 49);
    std::uniform_int_distribution<int> len(1, 40);
    Dataset d;
    for (int i = 0; i < 100; ++i) {
        std::vector<std::uint32_t> t(static_cast<std::size_t>(len(gen)));
        for (auto & x : t) x = tok(gen);
        d.samples.push_back(test::make_sample("s" + std::to_string(i), t));
    }
    const auto p = token_distribution(d, 50);
    const auto q = test::brute_token_distribution(d, 50);
    REQUIRE(p.size() == q.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i] == q[i]);
    }
}

TEST_CASE("token_distribution rejects ids outside the vocabulary") {
    Dataset d;
    d.samples.push_back(test::make_sample("a", {0, 7}));
    CHECK_THROWS_AS(token_distribution(d, 5), OutOfRangeError);
}

TEST_CASE("fallback tokenizer splits words and lowercases") {
    const auto w = split_words("Hello, WORLD!  Ünïcode\tŒuvre—x");
    REQUIRE(w.size() >= 3);
    CHECK(w[0] == "hello");
    CHECK(w[1] == "world");
    CHECK(w[2] == "ünïcode");
    CHECK(fallback_tokenize("Hello world", 1000) == fallback_tokenize("hello, WORLD", 1000));
}

TEST_CASE("activation matrix round-trips bit-exactly") {
    test::TempDir dir("dm");
    std::mt19937_64 gen(3);
    FloatMatrix data(5, 7);
    std::uniform_real_distribution<float> uf(-1e6f, 1e6f);
    for (long i = 0; i < data.rows(); ++i)
        for (long j = 0; j < data.cols(); ++j) data(i, j) = uf(gen);
    data(0, 0) = -0.0f;
    data(1, 1) = std::numeric_limits<float>::denorm_min();
    ActivationMatrix m({"a", "b", "c", "d", "é"}, {3, 4}, data);
    write_activations(m, dir / "acts.cola");
    const auto back = read_activations(dir / "acts.cola");
    CHECK(back == m);
    CHECK(std::signbit(back.data()(0, 0)));
    CHECK(encode_activations(back) == encode_activations(m));
}

TEST_CASE("activation reader rejects corrupt files") {
    ActivationMatrix m({"a", "b"}, {2}, FloatMatrix(FloatMatrix::Ones(2, 2)));
    const std::string bytes = encode_activations(m);

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_activations(bad_magic), FormatError);

    std::string bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_AS(decode_activations(bad_version), FormatError);

    CHECK_THROWS_AS(decode_activations(bytes.substr(0, bytes.size() - 1)), FormatError);
    CHECK_THROWS_AS(decode_activations(bytes + "x"), FormatError);
}

TEST_CASE("activation matrix validates its invariants") {
    FloatMatrix nan_row = FloatMatrix::Zero(2, 3);
    nan_row(1, 2) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(ActivationMatrix({"a", "b"}, {3}, nan_row), ValidationError);
    CHECK_THROWS_AS(ActivationMatrix({"a", "b"}, {2}, FloatMatrix(FloatMatrix::Zero(2, 3))), ShapeError);
    CHECK_THROWS_AS(ActivationMatrix({"a", "a"}, {3}, FloatMatrix(FloatMatrix::Zero(2, 3))), ValidationError);
    CHECK_THROWS_AS(ActivationMatrix({"a"}, {0, 3}, FloatMatrix(FloatMatrix::Zero(1, 3))), ValidationError);
}

TEST_CASE("layer_columns slices one segment") {
    FloatMatrix data(2, 5);
    data << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    ActivationMatrix m({"a", "b"}, {2, 3}, data);
    CHECK(m.layer_offset(1) == 2);
    const auto x = m.layer_columns(1, {1, 0});
    REQUIRE(x.rows() == 3);
    REQUIRE(x.cols() == 2);
    CHECK(x(0, 0) == 8);
    CHECK(x(2, 0) == 10);
    CHECK(x(0, 1) == 3);
}

TEST_CASE("compression scheme json round-trip and validation") {
    CompressionScheme s;
    s.kind = SchemeKind::wanda_prune;
    s.block_pattern = BlockPattern{4, 8};
    const auto back = scheme_from_json(to_json(s));
    CHECK(back.kind == s.kind);
    CHECK(back.block_pattern == s.block_pattern);

    CompressionScheme q;
    q.kind = SchemeKind::rtn_quant;
    q.bits = 1;
    CHECK_THROWS_AS(validate(q), ValidationError);
}

TEST_CASE("selection result json round-trip") {
    SelectionResult r;
    r.selected_ids = {"b", "a"};
    r.cluster_assignments = {{"a", 1}, {"b", 0}, {"c", 0}};
    r.centroids = cola::Matrix::Identity(2, 3);
    r.inertia = 1.25;
    r.seed = 99;
    const auto back = selection_from_json(to_json(r));
    CHECK(back.selected_ids == r.selected_ids);
    CHECK(back.cluster_assignments == r.cluster_assignments);
    CHECK(back.centroids == r.centroids);
    CHECK(back.inertia == r.inertia);
    CHECK(back.seed == r.seed);
}
