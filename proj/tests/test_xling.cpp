#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "debie/debias_linear.hpp"
#include "debie/numerics.hpp"
#include "debie/xling.hpp"
#include "test_support.hpp"

using namespace debie;
namespace fs = std::filesystem;

namespace {

TranslationDictionary identity_dict(const EmbeddingSpace& space) {
    TranslationDictionary d;
    for (const auto& w : space.vocab()) d.pairs.emplace_back(w, w);
    return d;
}

Matrix random_orthogonal(std::size_t d, std::mt19937_64& rng) {
    SvdResult f = svd(testing::random_matrix(d, d, rng));
    return f.u;
}

} // namespace

TEST_CASE("dictionary loader: duplicates dropped, multi-translations kept, format errors") {
    auto dir = fs::temp_directory_path() / ("debie_dict_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "d.tsv");
        f << "dog\thund\n";
        f << "dog\thund\n";   // exact duplicate, dropped
        f << "dog\tkoeter\n"; // multi-translation, kept
        f << "cat\tkatze\n";
    }
    auto dict = load_dictionary(dir / "d.tsv");
    CHECK(dict.pairs.size() == 3);
    CHECK(dict.duplicates_dropped == 1);

    {
        std::ofstream f(dir / "bad.tsv");
        f << "only_one_column\n";
    }
    CHECK_THROWS(load_dictionary(dir / "bad.tsv"));
    {
        std::ofstream f(dir / "three.tsv");
        f << "a\tb\tc\n";
    }
    CHECK_THROWS(load_dictionary(dir / "three.tsv"));
    fs::remove_all(dir);
}

TEST_CASE("self-projection with an identity dictionary is the identity map") {
    std::mt19937_64 rng(501);
    auto space = testing::random_space(30, 4, rng);
    auto fit = fit_projection(space, space, identity_dict(space));
    CHECK(fit.pairs_used == 30);
    CHECK(max_abs_diff(fit.w, Matrix::identity(4)) < 1e-9);
    CHECK(fit.low_coverage); // under 100 pairs
}

TEST_CASE("projection recovers the inverse of a planted orthogonal map") {
    std::mt19937_64 rng(503);
    const std::size_t d = 5;
    auto src = testing::random_space(40, d, rng);
    Matrix q = random_orthogonal(d, rng);
    auto tgt = src.with_matrix(matmul(src.matrix(), q), false);
    auto fit = fit_projection(src, tgt, identity_dict(src));
    // tgt * w lands back in src coordinates, so w = q^T
    CHECK(max_abs_diff(fit.w, transpose(q)) < 1e-8);

    Matrix gram = matmul(transpose(fit.w), fit.w);
    CHECK(max_abs_diff(gram, Matrix::identity(d)) < 1e-8);
}

TEST_CASE("projection preserves pairwise cosines of the target space") {
    std::mt19937_64 rng(507);
    const std::size_t d = 6;
    auto src = testing::random_space(25, d, rng);
    auto tgt = src.with_matrix(matmul(src.matrix(), random_orthogonal(d, rng)), false);
    auto fit = fit_projection(src, tgt, identity_dict(src));
    Matrix projected = matmul(tgt.matrix(), fit.w);
    std::uniform_int_distribution<std::size_t> pick(0, 24);
    for (int s = 0; s < 300; ++s) {
        const std::size_t i = pick(rng), j = pick(rng);
        CHECK(cosine(projected.row(i), projected.row(j)) ==
              doctest::Approx(cosine(tgt.vector_at(i), tgt.vector_at(j))).epsilon(1e-8));
    }
}

TEST_CASE("oov dictionary entries are dropped with counts; zero usable pairs error") {
    std::mt19937_64 rng(509);
    auto src = testing::random_space(10, 3, rng);
    auto tgt = testing::random_space(10, 3, rng, "v");
    TranslationDictionary dict;
    dict.pairs = {{"w0", "v0"}, {"w1", "v1"}, {"missing", "v2"}, {"w3", "nope"}};
    auto fit = fit_projection(src, tgt, dict);
    CHECK(fit.pairs_used == 2);
    CHECK(fit.pairs_dropped == 2);

    TranslationDictionary bad;
    bad.pairs = {{"missing", "alsogone"}};
    CHECK_THROWS(fit_projection(src, tgt, bad));

    auto tall = testing::random_space(4, 5, rng, "x");
    CHECK_THROWS(fit_projection(src, tall, dict)); // dim mismatch
}

TEST_CASE("transfer with identity projection and empty pipeline returns the space unchanged") {
    std::mt19937_64 rng(511);
    auto space = testing::random_space(15, 4, rng);
    DebiasPipeline empty;
    auto out = transfer_debias(space, Matrix::identity(4), empty);
    CHECK(out.matrix() == space.matrix());
}

TEST_CASE("transfer with empty pipeline equals plain projection") {
    std::mt19937_64 rng(513);
    auto space = testing::random_space(12, 4, rng);
    Matrix q = random_orthogonal(4, rng);
    DebiasPipeline empty;
    auto out = transfer_debias(space, q, empty);
    CHECK(out.matrix() == matmul(space.matrix(), q));
}

TEST_CASE("transfer removes a planted bias from a rotated copy of the source") {
    std::mt19937_64 rng(517);
    const std::size_t d = 6;
    // Source with a planted separation along axis 0.
    std::normal_distribution<double> gauss(0.0, 0.3);
    const std::size_t n = 30;
    Matrix m(n, d);
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < n; ++i) {
        vocab.push_back("w" + std::to_string(i));
        for (std::size_t j = 0; j < d; ++j) m(i, j) = gauss(rng);
        if (i < 4)
            m(i, 0) += 1.0;
        else if (i < 8)
            m(i, 0) -= 1.0;
        const double nr = norm2(m.row(i));
        for (std::size_t j = 0; j < d; ++j) m(i, j) /= nr;
    }
    auto src = EmbeddingSpace::from_data(vocab, m, true);

    BiasSpec spec;
    spec.name = "planted";
    spec.t1 = {"w0", "w1", "w2", "w3"};
    spec.t2 = {"w4", "w5", "w6", "w7"};
    auto deb = fit_gbdd(src, spec);
    auto pipeline = compose({Stage{deb}});

    // "Target language": the same space in rotated coordinates.
    Matrix q = random_orthogonal(d, rng);
    auto tgt = src.with_matrix(matmul(src.matrix(), q), false);
    auto fit = fit_projection(src, tgt, identity_dict(src));
    auto transferred = transfer_debias(tgt, fit.w, pipeline);

    // Projection returns the rows to source coordinates (within fit
    // tolerance), after which the source-fitted direction is removed.
    for (std::size_t i = 0; i < transferred.size(); ++i)
        CHECK(std::abs(dot(transferred.vector_at(i), deb.direction)) < 1e-8);
}
