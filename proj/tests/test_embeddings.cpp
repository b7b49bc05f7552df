#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "swe2/embeddings.hpp"
#include "swe2/errors.hpp"
#include "swe2/rng.hpp"

using namespace swe2;

namespace {

const std::string kDataDir = SWE2_DATA_DIR;

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.dot(b) / (a.norm() * b.norm());
}

std::vector<std::vector<std::string>> cooccurrence_fixture() {
    std::vector<std::vector<std::string>> corpus;
    for (int i = 0; i < 500; ++i) corpus.push_back({"A", "B"});
    for (int i = 0; i < 10; ++i) corpus.push_back({"A", "C"});
    for (int i = 0; i < 10; ++i) corpus.push_back({"D", "C"});
    return corpus;
}

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("cbow pulls co-occurring symbols together") {
    CbowConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 10;
    cfg.seed = 5;
    EmbeddingTable t = train_cbow(cooccurrence_fixture(), cfg, EmbeddingKind::Char);
    CHECK(cosine(t.vectors.at("A"), t.vectors.at("B")) > cosine(t.vectors.at("A"), t.vectors.at("C")));
    for (const auto& [sym, v] : t.vectors) CHECK(v.size() == 8);
}

TEST_CASE("cbow loss trends down") {
    CbowConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 10;
    cfg.seed = 5;
    CbowHistory h;
    train_cbow(cooccurrence_fixture(), cfg, EmbeddingKind::Char, &h);
    REQUIRE(h.epoch_mean_loss.size() == 10);
    CHECK(h.epoch_mean_loss.back() < h.epoch_mean_loss.front());
}

TEST_CASE("cbow is deterministic under a fixed seed") {
    CbowConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 3;
    cfg.seed = 42;
    EmbeddingTable a = train_cbow(cooccurrence_fixture(), cfg, EmbeddingKind::Char);
    EmbeddingTable b = train_cbow(cooccurrence_fixture(), cfg, EmbeddingKind::Char);
    REQUIRE(a.vectors.size() == b.vectors.size());
    for (const auto& [sym, v] : a.vectors) CHECK((v - b.vectors.at(sym)).norm() == 0.0);
}

TEST_CASE("cbow rejects bad input") {
    CbowConfig cfg;
    CHECK_THROWS_AS(train_cbow({}, cfg, EmbeddingKind::Char), EmptyCorpus);
    CHECK_THROWS_AS(train_cbow({{"A"}}, cfg, EmbeddingKind::Char), InvalidConfig);
}

TEST_CASE("cbow step gradient matches central differences") {
    // 5-symbol toy model at float64, relative tolerance 1e-4.
    const int vocab = 5, dim = 6;
    Rng rng(11);
    Eigen::MatrixXd in_vec(vocab, dim), out_vec(vocab, dim);
    for (int w = 0; w < vocab; ++w)
        for (int d = 0; d < dim; ++d) {
            in_vec(w, d) = rng.uniform(-0.5, 0.5);
            out_vec(w, d) = rng.uniform(-0.5, 0.5);
        }
    std::vector<int> context = {1, 2, 4};
    int center = 0;
    std::vector<int> negatives = {3, 4};

    Eigen::MatrixXd g_in = Eigen::MatrixXd::Zero(vocab, dim);
    Eigen::MatrixXd g_out = Eigen::MatrixXd::Zero(vocab, dim);
    cbow_step_loss(in_vec, out_vec, context, center, negatives, &g_in, &g_out);

    const double eps = 1e-6;
    auto check_matrix = [&](Eigen::MatrixXd& m, const Eigen::MatrixXd& g) {
        for (int w = 0; w < vocab; ++w)
            for (int d = 0; d < dim; ++d) {
                double orig = m(w, d);
                m(w, d) = orig + eps;
                double lp = cbow_step_loss(in_vec, out_vec, context, center, negatives);
                m(w, d) = orig - eps;
                double lm = cbow_step_loss(in_vec, out_vec, context, center, negatives);
                m(w, d) = orig;
                double fd = (lp - lm) / (2 * eps);
                double rel = std::fabs(g(w, d) - fd) /
                             std::max(1e-8, std::fabs(g(w, d)) + std::fabs(fd));
                if (std::fabs(g(w, d)) + std::fabs(fd) > 1e-10) CHECK(rel < 1e-4);
            }
    };
    check_matrix(in_vec, g_in);
    check_matrix(out_vec, g_out);
}

TEST_CASE("embed_chars pads to four rows and handles unknowns") {
    EmbeddingTable t = make_table(20, EmbeddingKind::Char);
    Rng rng(3);
    for (char c = 'a'; c <= 'e'; ++c) {
        Eigen::VectorXd v(20);
        for (int d = 0; d < 20; ++d) v[d] = rng.uniform(-1, 1);
        t.vectors[std::string(1, c)] = v;
    }
    Eigen::MatrixXd two = embed_chars("ab", t);
    REQUIRE(two.rows() == 4);
    CHECK((two.row(0) - t.vectors.at("a").transpose()).norm() == 0.0);
    CHECK((two.row(1) - t.vectors.at("b").transpose()).norm() == 0.0);
    CHECK(two.row(2).isZero());
    CHECK(two.row(3).isZero());

    CHECK(embed_chars("abcde", t).rows() == 5);

    // Multibyte unknown codepoint is one PAD row.
    Eigen::MatrixXd u = embed_chars("a\xE2\x80\xA0", t);
    REQUIRE(u.rows() == 4);
    CHECK((u.row(0) - t.vectors.at("a").transpose()).norm() == 0.0);
    CHECK(u.row(1).isZero());
}

TEST_CASE("vector file round trip and parse errors") {
    std::string good = write_temp("swe2_vec_good.vec", "2 3\na 1 0 0\nb 0 1 0\n");
    EmbeddingTable t = load_word_vectors(good);
    CHECK(t.dim == 3);
    CHECK(t.vectors.at("a")[0] == doctest::Approx(1.0));
    CHECK(t.vectors.at("b")[1] == doctest::Approx(1.0));
    std::remove(good.c_str());

    std::string bad = write_temp("swe2_vec_bad.vec", "2 3\na 1 0 0\nb 0 1\n");
    CHECK_THROWS_AS(load_word_vectors(bad), ParseError);
    std::remove(bad.c_str());

    std::string dup = write_temp("swe2_vec_dup.vec", "2 2\na 1 0\na 0 1\n");
    EmbeddingTable d = load_word_vectors(dup);
    CHECK(d.vectors.at("a")[1] == doctest::Approx(1.0));  // last occurrence wins
    std::remove(dup.c_str());
}

TEST_CASE("save/load embedding table is lossless") {
    CbowConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    EmbeddingTable t = train_cbow(cooccurrence_fixture(), cfg, EmbeddingKind::Char);
    auto path = (std::filesystem::temp_directory_path() / "swe2_roundtrip.vec").string();
    save_embedding_table(t, path);
    EmbeddingTable back = load_embedding_table(path, EmbeddingKind::Char);
    for (const auto& [sym, v] : t.vectors) {
        REQUIRE(back.vectors.count(sym) == 1);
        CHECK((back.vectors.at(sym) - v).norm() < 1e-12);
    }
    std::remove(path.c_str());
}

TEST_CASE("OOV word vectors are deterministic, unit-norm and distinct") {
    EmbeddingTable words = make_table(16, EmbeddingKind::Word);
    CHECK((word_vector("zork", words) - word_vector("zork", words)).norm() == 0.0);
    CHECK(word_vector("zork", words).norm() == doctest::Approx(1.0));

    Rng rng(31);
    int collisions = 0;
    for (int k = 0; k < 1000; ++k) {
        std::string a, b;
        for (int i = 0; i < 6; ++i) {
            a.push_back(static_cast<char>('a' + rng.uniform_index(26)));
            b.push_back(static_cast<char>('a' + rng.uniform_index(26)));
        }
        if (a == b) continue;
        if ((word_vector(a, words) - word_vector(b, words)).norm() < 1e-12) ++collisions;
    }
    CHECK(collisions == 0);
}

TEST_CASE("embed_phonemes composes the pipeline") {
    PronDict dict = load_pron_dict(kDataDir + "/cmudict_fixture.txt");
    ChunkTable chunks = ChunkTable::load(kDataDir + "/g2p_chunks.tsv");
    EmbeddingTable t = make_table(20, EmbeddingKind::Phoneme);
    Rng rng(4);
    for (const char* s : {"HH", "AH", "L", "OW", "Y", "UW"}) {
        Eigen::VectorXd v(20);
        for (int d = 0; d < 20; ++d) v[d] = rng.uniform(-1, 1);
        t.vectors[s] = v;
    }
    Eigen::MatrixXd m = embed_phonemes("hello", dict, chunks, t);
    REQUIRE(m.rows() == 4);
    CHECK((m.row(0) - t.vectors.at("HH").transpose()).norm() == 0.0);
    CHECK((m.row(3) - t.vectors.at("OW").transpose()).norm() == 0.0);

    // Two phonemes pad to four rows.
    Eigen::MatrixXd two = embed_phonemes("you", dict, chunks, t);
    REQUIRE(two.rows() == 4);
    CHECK(two.row(2).isZero());
}
