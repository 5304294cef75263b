#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "debie/debias_linear.hpp"
#include "debie/eval.hpp"
#include "debie/numerics.hpp"
#include "debie/report.hpp"
#include "test_support.hpp"

using namespace debie;
namespace fs = std::filesystem;

namespace {

BiasSpec paired_spec(std::vector<std::string> t1, std::vector<std::string> t2,
                     std::vector<std::string> a1, std::vector<std::string> a2) {
    BiasSpec s;
    s.name = "toy";
    s.t1 = std::move(t1);
    s.t2 = std::move(t2);
    s.a1 = std::move(a1);
    s.a2 = std::move(a2);
    s.form = AttributeForm::paired;
    return s;
}

double cos_of(const EmbeddingSpace& s, const std::string& a, const std::string& b) {
    return cosine(*s.lookup(a), *s.lookup(b));
}

// Independent WEAT oracle: associations from raw cosines, exhaustive
// bipartition enumeration via bitmask.
struct WeatOracle {
    double statistic;
    double effect;
    double p;
    std::size_t ties;
};

WeatOracle weat_oracle(const EmbeddingSpace& space, const std::vector<std::string>& t1,
                       const std::vector<std::string>& t2, const std::vector<std::string>& a1,
                       const std::vector<std::string>& a2) {
    auto assoc = [&](const std::string& t) {
        double s1 = 0.0, s2 = 0.0;
        for (const auto& a : a1) s1 += cos_of(space, t, a);
        for (const auto& a : a2) s2 += cos_of(space, t, a);
        return s1 / static_cast<double>(a1.size()) - s2 / static_cast<double>(a2.size());
    };
    std::vector<double> all;
    double sum1 = 0.0, sum2 = 0.0;
    for (const auto& t : t1) {
        all.push_back(assoc(t));
        sum1 += all.back();
    }
    for (const auto& t : t2) {
        all.push_back(assoc(t));
        sum2 += all.back();
    }
    const std::size_t n = all.size();
    const double stat = sum1 - sum2;

    const double mu1 = sum1 / static_cast<double>(t1.size());
    const double mu2 = sum2 / static_cast<double>(t2.size());
    double mean = 0.0;
    for (double v : all) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : all) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);

    const std::size_t k = n / 2;
    std::size_t above = 0, count = 0, ties = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
        double s1 = 0.0, srest = 0.0;
        for (std::size_t i = 0; i < n; ++i) (mask >> i & 1 ? s1 : srest) += all[i];
        const double s_star = s1 - srest;
        if (s_star > stat) ++above;
        if (s_star == stat) ++ties;
        ++count;
    }
    return {stat, (mu1 - mu2) / std::sqrt(var), static_cast<double>(above) / static_cast<double>(count),
            ties};
}

} // namespace

TEST_CASE("weat matches the exhaustive bipartition oracle on a 2+2 hand-built space") {
    std::mt19937_64 rng(401);
    auto space = testing::random_space(8, 4, rng);
    auto spec = paired_spec({"w0", "w1"}, {"w2", "w3"}, {"w4", "w5"}, {"w6", "w7"});
    WeatOptions opt;
    opt.mode = WeatOptions::Permutations::exact;
    auto res = weat(space, spec, opt);
    auto oracle = weat_oracle(space, spec.t1, spec.t2, spec.a1, spec.a2);
    CHECK(res.statistic == doctest::Approx(oracle.statistic).epsilon(1e-12));
    CHECK(res.effect_size.value() == doctest::Approx(oracle.effect).epsilon(1e-12));
    CHECK(res.p_value == doctest::Approx(oracle.p).epsilon(1e-15));
    CHECK(res.exact);
    CHECK(res.permutations == 6); // C(4,2)
}

TEST_CASE("weat swap antisymmetry: statistic and effect negate exactly, p complements") {
    std::mt19937_64 rng(403);
    auto space = testing::random_space(10, 4, rng);
    auto fwd = paired_spec({"w0", "w1", "w2"}, {"w3", "w4", "w5"}, {"w6", "w7"}, {"w8", "w9"});
    auto swp = paired_spec({"w3", "w4", "w5"}, {"w0", "w1", "w2"}, {"w6", "w7"}, {"w8", "w9"});
    WeatOptions opt;
    opt.mode = WeatOptions::Permutations::exact;
    auto a = weat(space, fwd, opt);
    auto b = weat(space, swp, opt);
    CHECK(b.statistic == -a.statistic);                    // bitwise negation
    CHECK(b.effect_size.value() == -a.effect_size.value()); // sigma is order-canonical
    auto oracle = weat_oracle(space, fwd.t1, fwd.t2, fwd.a1, fwd.a2);
    // complement up to the tied permutations (the identity partition,
    // at least, reproduces the observed statistic exactly)
    const double total = static_cast<double>(a.permutations);
    CHECK(a.p_value + b.p_value == doctest::Approx(1.0 - oracle.ties / total).epsilon(1e-12));
}

TEST_CASE("weat with identical attribute vectors: zero statistic, undefined effect") {
    Matrix m(8, 3);
    std::mt19937_64 rng(407);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 3; ++j) m(i, j) = gauss(rng);
        const double n = norm2(m.row(i));
        for (std::size_t j = 0; j < 3; ++j) m(i, j) /= n;
    }
    // a1 vectors identical to a2 vectors pairwise
    m(4, 0) = 1.0;
    m(5, 1) = 1.0;
    m(6, 0) = 1.0;
    m(7, 1) = 1.0;
    auto space = EmbeddingSpace::from_data({"t1a", "t1b", "t2a", "t2b", "m1", "m2", "f1", "f2"}, m, true);
    auto spec = paired_spec({"t1a", "t1b"}, {"t2a", "t2b"}, {"m1", "m2"}, {"f1", "f2"});
    auto res = weat(space, spec);
    CHECK(res.statistic == doctest::Approx(0.0));
    CHECK_FALSE(res.effect_size.has_value());
}

TEST_CASE("weat monte carlo agrees with exact enumeration within 0.01") {
    std::mt19937_64 rng(409);
    auto space = testing::random_space(12, 5, rng);
    auto spec = paired_spec({"w0", "w1", "w2"}, {"w3", "w4", "w5"}, {"w6", "w7"}, {"w8", "w9"});
    WeatOptions exact_opt;
    exact_opt.mode = WeatOptions::Permutations::exact;
    WeatOptions mc_opt;
    mc_opt.mode = WeatOptions::Permutations::monte_carlo;
    mc_opt.samples = 100000;
    mc_opt.seed = 31337;
    auto pe = weat(space, spec, exact_opt);
    auto pm = weat(space, spec, mc_opt);
    CHECK(std::abs(pe.p_value - pm.p_value) < 0.01);
    CHECK_FALSE(pm.exact);
}

TEST_CASE("weat effect size is invariant under common positive rescaling") {
    std::mt19937_64 rng(411);
    auto space = testing::random_space(12, 4, rng);
    auto spec = paired_spec({"w0", "w1"}, {"w2", "w3"}, {"w4", "w5"}, {"w6", "w7"});
    // power-of-two scaling leaves every cosine bit-identical
    Matrix scaled = space.matrix();
    for (std::size_t i = 0; i < scaled.rows(); ++i)
        for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= 2.0;
    auto scaled_space = EmbeddingSpace::from_data(space.vocab(), scaled, false);
    auto a = weat(space, spec);
    auto b = weat(scaled_space, spec);
    CHECK(a.effect_size.value() == b.effect_size.value());
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == b.p_value);
}

TEST_CASE("weat counts oov terms and enforces preconditions") {
    std::mt19937_64 rng(413);
    auto space = testing::random_space(10, 3, rng);
    auto spec = paired_spec({"w0", "w1", "w2", "gone"}, {"w3", "w4"}, {"w5", "w6"}, {"w7", "w8"});
    auto res = weat(space, spec);
    CHECK(res.oov == 1);
    CHECK(res.n_targets == 5);
    CHECK(res.odd_union);

    auto all_gone = paired_spec({"x1"}, {"w2", "w3"}, {"w4"}, {"w5"});
    CHECK_THROWS(weat(space, all_gone));

    BiasSpec single;
    single.t1 = {"w0"};
    single.t2 = {"w1"};
    single.a = {"w2"};
    single.form = AttributeForm::single;
    CHECK_THROWS(weat(space, single));
}

TEST_CASE("ect is 100 when target means coincide") {
    Matrix m(6, 3);
    m(0, 0) = 1.0;               // t1
    m(1, 0) = 1.0;               // t2 (same vector, different word)
    m(2, 1) = 1.0;               // attributes at varying angles
    m(3, 0) = 0.6;
    m(3, 1) = 0.8;
    m(4, 0) = 0.8;
    m(4, 1) = 0.6;
    m(5, 2) = 1.0;
    auto space = EmbeddingSpace::from_data({"t1", "t2", "a1", "a2", "a3", "a4"}, m, true);
    BiasSpec spec;
    spec.name = "ect";
    spec.t1 = {"t1"};
    spec.t2 = {"t2"};
    spec.a = {"a1", "a2", "a3", "a4"};
    spec.form = AttributeForm::single;
    auto res = ect(space, spec);
    CHECK(res.value.value() == doctest::Approx(100.0));
}

TEST_CASE("ect reversal gives -100 and constant similarities are undefined") {
    Matrix m(5, 2);
    m(0, 0) = 1.0; // t1 mean = e1
    m(1, 1) = 1.0; // t2 mean = e2
    auto angle = [&](std::size_t row, double rad) {
        m(row, 0) = std::cos(rad);
        m(row, 1) = std::sin(rad);
    };
    angle(2, 0.3);
    angle(3, 0.7);
    angle(4, 1.2);
    auto space = EmbeddingSpace::from_data({"t1", "t2", "a1", "a2", "a3"}, m, true);
    BiasSpec spec;
    spec.t1 = {"t1"};
    spec.t2 = {"t2"};
    spec.a = {"a1", "a2", "a3"};
    spec.form = AttributeForm::single;
    // cos to e1 decreases with the angle while cos to e2 increases
    auto res = ect(space, spec);
    CHECK(res.value.value() == doctest::Approx(-100.0));
}

TEST_CASE("bat trivial win and all-ties cases") {
    // a1 terms sit exactly on their queries, a2 terms far away.
    Matrix m(8, 4);
    m(0, 0) = 1.0;                // t1
    m(1, 1) = 1.0;                // t2
    m(2, 3) = 10.0;               // unrelated filler
    // q1 = t1 - t2 + a2 ; place a1 vectors exactly at the two q1 values
    m(3, 0) = 1.0;
    m(3, 1) = -1.0;
    m(3, 2) = 5.0;  // a1_0 = t1 - t2 + a2_0
    m(4, 0) = 1.0;
    m(4, 1) = -1.0;
    m(4, 2) = 7.0;  // a1_1 = t1 - t2 + a2_1
    m(5, 2) = 5.0;  // a2_0
    m(6, 2) = 7.0;  // a2_1
    m(7, 3) = -9.0; // filler
    auto space = EmbeddingSpace::from_data({"t1", "t2", "x", "a1x", "a1y", "a2x", "a2y", "y"}, m, false);
    auto spec = paired_spec({"t1"}, {"t2"}, {"a1x", "a1y"}, {"a2x", "a2y"});
    auto res = bat(space, spec);
    // every a1 coincides with its q1 (and each q2 with its a2), so all
    // comparisons are strict wins
    CHECK(res.value == 100.0);

    // All attribute vectors identical: every comparison ties, score 0.
    Matrix m2(6, 2);
    m2(0, 0) = 1.0;
    m2(1, 1) = 1.0;
    for (std::size_t r = 2; r < 6; ++r) m2(r, 0) = 0.5; // identical attributes
    auto tie_space = EmbeddingSpace::from_data({"t1", "t2", "p", "q", "r", "s"}, m2, false);
    auto tie_spec = paired_spec({"t1"}, {"t2"}, {"p", "q"}, {"r", "s"});
    auto tie_res = bat(tie_space, tie_spec);
    CHECK(tie_res.value == 0.0);
}

TEST_CASE("bat matches an exhaustive 2x2x2x2 comparison oracle") {
    std::mt19937_64 rng(419);
    auto space = testing::random_space(8, 3, rng);
    auto spec = paired_spec({"w0", "w1"}, {"w2", "w3"}, {"w4", "w5"}, {"w6", "w7"});
    auto res = bat(space, spec);

    // Oracle: direct enumeration of every 4-tuple and every opposing term.
    const std::vector<std::string> t1 = {"w0", "w1"}, t2 = {"w2", "w3"};
    const std::vector<std::string> a1 = {"w4", "w5"}, a2 = {"w6", "w7"};
    std::size_t wins = 0, total = 0;
    auto vec = [&](const std::string& w) { return *space.lookup(w); };
    auto dist = [&](const std::vector<double>& q, std::span<const double> v) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) s += (q[i] - v[i]) * (q[i] - v[i]);
        return std::sqrt(s);
    };
    for (const auto& w_t1 : t1)
        for (const auto& w_t2 : t2)
            for (const auto& w_a1 : a1)
                for (const auto& w_a2 : a2) {
                    std::vector<double> q1(3), q2(3);
                    for (std::size_t c = 0; c < 3; ++c) {
                        q1[c] = vec(w_t1)[c] - vec(w_t2)[c] + vec(w_a2)[c];
                        q2[c] = vec(w_a1)[c] - vec(w_t1)[c] + vec(w_t2)[c];
                    }
                    for (const auto& other : a2) {
                        if (other == w_a2) continue;
                        ++total;
                        if (dist(q1, vec(w_a1)) < dist(q1, vec(other))) ++wins;
                    }
                    for (const auto& other : a1) {
                        if (other == w_a1) continue;
                        ++total;
                        if (dist(q2, vec(w_a2)) < dist(q2, vec(other))) ++wins;
                    }
                }
    CHECK(res.comparisons == total);
    CHECK(res.value == doctest::Approx(100.0 * wins / static_cast<double>(total)).epsilon(1e-12));
}

TEST_CASE("bat needs two attribute terms per side") {
    std::mt19937_64 rng(421);
    auto space = testing::random_space(6, 3, rng);
    auto spec = paired_spec({"w0"}, {"w1"}, {"w2"}, {"w3", "w4"});
    CHECK_THROWS(bat(space, spec));
}

TEST_CASE("implicit tests saturate on planted structure and drop to chance after gbdd") {
    std::mt19937_64 rng(431);
    const std::size_t d = 8;
    std::normal_distribution<double> gauss(0.0, 0.25);
    auto build_word = [&](Matrix& m, std::size_t row, double offset) {
        for (std::size_t j = 0; j < d; ++j) m(row, j) = gauss(rng);
        m(row, 0) += offset;
        const double n = norm2(m.row(row));
        for (std::size_t j = 0; j < d; ++j) m(row, j) /= n;
    };
    const std::size_t n_test = 6, n_train = 8;
    Matrix m(2 * (n_test + n_train), d);
    std::vector<std::string> vocab;
    AugmentedSpec aug;
    aug.k = 1;
    std::size_t row = 0;
    for (std::size_t i = 0; i < n_test; ++i, ++row) {
        vocab.push_back("ti" + std::to_string(i));
        aug.test.t1.push_back(vocab.back());
        build_word(m, row, +1.0);
    }
    for (std::size_t i = 0; i < n_test; ++i, ++row) {
        vocab.push_back("tj" + std::to_string(i));
        aug.test.t2.push_back(vocab.back());
        build_word(m, row, -1.0);
    }
    for (std::size_t i = 0; i < n_train; ++i, ++row) {
        vocab.push_back("ri" + std::to_string(i));
        aug.train.t1.push_back(vocab.back());
        build_word(m, row, +1.0);
    }
    for (std::size_t i = 0; i < n_train; ++i, ++row) {
        vocab.push_back("rj" + std::to_string(i));
        aug.train.t2.push_back(vocab.back());
        build_word(m, row, -1.0);
    }
    aug.test.name = aug.train.name = "planted";
    auto space = EmbeddingSpace::from_data(vocab, m, true);

    ImplicitOptions opt;
    opt.seeds = make_seed_list(7, 20);
    auto biased = implicit_tests(space, aug, opt);
    CHECK(biased.km == doctest::Approx(100.0));
    CHECK(biased.svm == doctest::Approx(100.0));

    auto deb = fit_gbdd(space, aug.train);
    auto cleaned = apply_gbdd_space(deb, space);
    auto after = implicit_tests(cleaned, aug, opt);
    CHECK(after.km < 80.0);
    CHECK(after.svm < 80.0);
}

TEST_CASE("semantic quality: self-consistent gold gives 100 and oracle agreement") {
    std::mt19937_64 rng(433);
    auto space = testing::random_space(10, 4, rng);
    std::vector<BenchmarkPair> bench;
    for (std::size_t i = 0; i + 1 < 10; i += 2) {
        const double g = space.row_cosine(i, i + 1);
        bench.push_back({"w" + std::to_string(i), "w" + std::to_string(i + 1), g});
    }
    auto res = semantic_quality(space, bench);
    CHECK(res.value.value() == doctest::Approx(100.0));
    CHECK(res.covered == 5);

    // Oracle: brute-force rank correlation on a 5-pair toy benchmark with
    // scrambled gold scores.
    std::vector<BenchmarkPair> scrambled = bench;
    std::vector<double> gold = {2.0, -1.0, 0.5, 3.0, 1.0};
    for (std::size_t i = 0; i < 5; ++i) scrambled[i].gold = gold[i];
    std::vector<double> predicted;
    for (std::size_t i = 0; i + 1 < 10; i += 2) predicted.push_back(space.row_cosine(i, i + 1));
    auto rank = [](const std::vector<double>& x) {
        std::vector<double> r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::size_t below = 0, eq = 0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (x[j] < x[i]) ++below;
                if (j != i && x[j] == x[i]) ++eq;
            }
            r[i] = 1.0 + below + 0.5 * eq;
        }
        return r;
    };
    auto ra = rank(predicted), rb = rank(gold);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= 5;
    mb /= 5;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        sxy += (ra[i] - ma) * (rb[i] - mb);
        sxx += (ra[i] - ma) * (ra[i] - ma);
        syy += (rb[i] - mb) * (rb[i] - mb);
    }
    auto res2 = semantic_quality(space, scrambled);
    CHECK(res2.value.value() == doctest::Approx(100.0 * sxy / std::sqrt(sxx * syy)).epsilon(1e-12));
}

TEST_CASE("semantic quality counts coverage and errors with zero covered pairs") {
    std::mt19937_64 rng(437);
    auto space = testing::random_space(4, 3, rng);
    std::vector<BenchmarkPair> bench = {{"w0", "w1", 1.0}, {"w0", "nope", 2.0}};
    auto res = semantic_quality(space, bench);
    CHECK(res.covered == 1);
    CHECK(res.total == 2);
    CHECK_FALSE(res.value.has_value()); // one pair, correlation undefined

    std::vector<BenchmarkPair> none = {{"a", "b", 1.0}};
    CHECK_THROWS(semantic_quality(space, none));
}

TEST_CASE("benchmark loader: simlex header, generic header, plain file") {
    auto dir = fs::temp_directory_path() / ("debie_bench_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "simlex.txt");
        f << "word1\tword2\tPOS\tSimLex999\tconc(w1)\tconc(w2)\tconcQ\tAssoc(USF)\tSimAssoc333\tSD(SimLex)\n";
        f << "old\tnew\tA\t1.58\t2.72\t2.81\t2\t7.25\t1\t0.41\n";
        f << "smart\tintelligent\tA\t9.2\t1.75\t2.46\t1\t7.11\t1\t0.67\n";
    }
    auto simlex = load_benchmark(dir / "simlex.txt");
    REQUIRE(simlex.size() == 2);
    CHECK(simlex[0].w1 == "old");
    CHECK(simlex[0].gold == doctest::Approx(1.58));

    {
        std::ofstream f(dir / "ws.tab");
        f << "Word 1\tWord 2\tHuman (mean)\n";
        f << "love\tsex\t6.77\n";
        f << "tiger\tcat\t7.35\n";
    }
    auto ws = load_benchmark(dir / "ws.tab");
    REQUIRE(ws.size() == 2);
    CHECK(ws[1].gold == doctest::Approx(7.35));

    {
        std::ofstream f(dir / "plain.txt");
        f << "alpha beta 0.5\ngamma delta 0.25\n";
    }
    auto plain = load_benchmark(dir / "plain.txt");
    REQUIRE(plain.size() == 2);
    CHECK(plain[0].w1 == "alpha");
    CHECK(plain[0].gold == 0.5);

    fs::remove_all(dir);
}

TEST_CASE("topology export: antipodal points land at symmetric first coordinates") {
    Matrix m(2, 4);
    m(0, 2) = 0.9;
    m(1, 2) = -0.9;
    auto space = EmbeddingSpace::from_data({"p", "q"}, m, false);
    BiasSpec spec;
    spec.t1 = {"p"};
    spec.t2 = {"q"};
    auto csv = topology_export_csv(space, spec);
    std::istringstream ss(csv);
    std::string header, l1, l2;
    std::getline(ss, header);
    std::getline(ss, l1);
    std::getline(ss, l2);
    CHECK(header == "word,set,pc1,pc2");
    CHECK(l1.rfind("p,t1,", 0) == 0);
    CHECK(l2.rfind("q,t2,", 0) == 0);
    // coordinates (+r, 0) and (-r, 0)
    auto parse_coords = [](const std::string& line) {
        auto p1 = line.find(',');
        auto p2 = line.find(',', p1 + 1);
        auto p3 = line.find(',', p2 + 1);
        return std::pair<double, double>{std::stod(line.substr(p2 + 1, p3 - p2 - 1)),
                                         std::stod(line.substr(p3 + 1))};
    };
    auto [x1, y1] = parse_coords(l1);
    auto [x2, y2] = parse_coords(l2);
    CHECK(x1 == doctest::Approx(0.9));
    CHECK(x2 == doctest::Approx(-0.9));
    CHECK(y1 == 0.0);
    CHECK(y2 == 0.0);
}

TEST_CASE("topology export row count equals in-vocabulary term count") {
    std::mt19937_64 rng(443);
    auto space = testing::random_space(10, 4, rng);
    auto spec = paired_spec({"w0", "w1"}, {"w2", "gone"}, {"w4", "w5"}, {"w6", "w7"});
    auto csv = topology_export_csv(space, spec);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8); // header + 7 terms
}

TEST_CASE("all pure metrics are invariant under an orthogonal map of the space") {
    std::mt19937_64 rng(449);
    auto space = testing::random_space(16, 5, rng);
    auto spec = paired_spec({"w0", "w1", "w2"}, {"w3", "w4", "w5"}, {"w6", "w7", "w8"},
                            {"w9", "w10", "w11"});
    // Orthogonal map from the svd of a random matrix.
    SvdResult f = svd(testing::random_matrix(5, 5, rng));
    Matrix rotated = matmul(space.matrix(), f.u);
    auto rot_space = EmbeddingSpace::from_data(space.vocab(), rotated, false);

    auto w1 = weat(space, spec);
    auto w2 = weat(rot_space, spec);
    CHECK(w1.effect_size.value() == doctest::Approx(w2.effect_size.value()).epsilon(1e-8));
    CHECK(w1.p_value == w2.p_value);

    auto merged = merge_attributes(spec);
    auto e1 = ect(space, merged);
    auto e2 = ect(rot_space, merged);
    CHECK(e1.value.value() == doctest::Approx(e2.value.value()).epsilon(1e-8));

    auto b1 = bat(space, spec);
    auto b2 = bat(rot_space, spec);
    CHECK(b1.value == doctest::Approx(b2.value).epsilon(1e-8));
}

TEST_CASE("report tsv keeps the fixed column order and NA for absent metrics") {
    EvalReport rep;
    rep.space_id = "toy.vec";
    rep.spec_name = "spec";
    rep.entries.push_back({"weat", 1.25, "effect_size", 0.01, 16, 0, ""});
    rep.entries.push_back({"ect", 73.5, "x100", std::nullopt, 16, 1, ""});
    rep.entries.push_back({"sl", std::nullopt, "x100", std::nullopt, 0, 0, "undefined"});
    auto tsv = report_tsv(rep);
    CHECK(tsv == "space\tspec\tweat\tect\tbat\tkm\tsvm\tsl\tws\n"
                 "toy.vec\tspec\t1.25\t73.5\tNA\tNA\tNA\tNA\tNA\n");
    auto js = report_json(rep);
    CHECK(js.find("\"weat\"") != std::string::npos);
    CHECK(js.find("\"p_value\"") != std::string::npos);
}
