#include "debie/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "debie/matrix.hpp"
#include "debie/ml_prims.hpp"
#include "debie/numerics.hpp"

namespace debie {

namespace {

struct Resolved {
    std::vector<std::size_t> idx;
    std::size_t missing = 0;
};

Resolved resolve(const EmbeddingSpace& space, const std::vector<std::string>& terms,
                 const TermLookup& lookup) {
    Resolved out;
    for (const auto& t : terms) {
        if (auto i = space.index_of(t, lookup.lowercase_fallback))
            out.idx.push_back(*i);
        else
            ++out.missing;
    }
    return out;
}

// Saturating binomial coefficient; anything above the cap behaves the same.
std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        // result *= (n - k + i) / i, guarding overflow
        const std::uint64_t num = n - k + i;
        if (result > cap * 8 / std::max<std::uint64_t>(num, 1)) return cap + 1;
        result = result * num / i;
        if (result > cap) return cap + 1;
    }
    return result;
}

double mean_cos_to(const EmbeddingSpace& space, std::size_t t, const std::vector<std::size_t>& set) {
    double s = 0.0;
    for (std::size_t a : set) s += space.row_cosine(t, a);
    return s / static_cast<double>(set.size());
}

} // namespace

std::vector<std::uint64_t> make_seed_list(std::uint64_t base, std::size_t runs) {
    std::vector<std::uint64_t> seeds(runs);
    for (std::size_t i = 0; i < runs; ++i) seeds[i] = base + i;
    return seeds;
}

WeatResult weat(const EmbeddingSpace& space, const BiasSpec& spec, const WeatOptions& options) {
    if (spec.form != AttributeForm::paired)
        throw std::invalid_argument("weat: spec must have paired attribute sets");
    const Resolved t1 = resolve(space, spec.t1, options.lookup);
    const Resolved t2 = resolve(space, spec.t2, options.lookup);
    const Resolved a1 = resolve(space, spec.a1, options.lookup);
    const Resolved a2 = resolve(space, spec.a2, options.lookup);
    WeatResult res;
    res.oov = t1.missing + t2.missing + a1.missing + a2.missing;
    if (t1.idx.empty() || t2.idx.empty() || a1.idx.empty() || a2.idx.empty())
        throw std::runtime_error("weat: a term set is empty after vocabulary filtering");
    const std::size_t n = t1.idx.size() + t2.idx.size();
    if (n < 4) throw std::runtime_error("weat: need at least 4 in-vocabulary targets");
    res.n_targets = n;
    res.odd_union = (n % 2) != 0;

    // Per-term association; the permutation test only re-partitions these.
    std::vector<double> assoc(n);
    for (std::size_t i = 0; i < t1.idx.size(); ++i)
        assoc[i] = mean_cos_to(space, t1.idx[i], a1.idx) - mean_cos_to(space, t1.idx[i], a2.idx);
    for (std::size_t j = 0; j < t2.idx.size(); ++j)
        assoc[t1.idx.size() + j] =
            mean_cos_to(space, t2.idx[j], a1.idx) - mean_cos_to(space, t2.idx[j], a2.idx);

    double sum1 = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < t1.idx.size(); ++i) sum1 += assoc[i];
    for (std::size_t j = 0; j < t2.idx.size(); ++j) sum2 += assoc[t1.idx.size() + j];
    res.statistic = sum1 - sum2;

    const double mu1 = sum1 / static_cast<double>(t1.idx.size());
    const double mu2 = sum2 / static_cast<double>(t2.idx.size());
    // Population sigma over a value-sorted copy: summation order independent
    // of which set a term came from, so swapping t1/t2 negates the effect
    // size exactly.
    std::vector<double> sorted = assoc;
    std::sort(sorted.begin(), sorted.end());
    double mean_all = 0.0;
    for (double v : sorted) mean_all += v;
    mean_all /= static_cast<double>(n);
    double var = 0.0;
    for (double v : sorted) var += (v - mean_all) * (v - mean_all);
    var /= static_cast<double>(n);
    if (var > 0.0)
        res.effect_size = (mu1 - mu2) / std::sqrt(var);

    const std::size_t k = n / 2;
    const std::uint64_t n_choose_k = binomial_capped(n, k, options.max_exact);
    bool use_exact = false;
    switch (options.mode) {
        case WeatOptions::Permutations::exact:
            if (n_choose_k > options.max_exact)
                throw std::runtime_error("weat: exact enumeration over budget for n=" + std::to_string(n));
            use_exact = true;
            break;
        case WeatOptions::Permutations::monte_carlo:
            use_exact = false;
            break;
        case WeatOptions::Permutations::auto_mode:
            use_exact = n_choose_k <= options.max_exact;
            break;
    }

    // s(partition) is accumulated as s(T1*) - s(T2*) with both sides summed
    // in ascending index order, so the identity partition reproduces the
    // observed statistic bit-exactly (matters for strict-inequality ties).
    std::size_t above = 0;
    if (use_exact) {
        std::vector<bool> member(n);
        std::vector<std::size_t> comb(k);
        std::iota(comb.begin(), comb.end(), 0);
        std::size_t count = 0;
        while (true) {
            std::fill(member.begin(), member.end(), false);
            for (std::size_t idx : comb) member[idx] = true;
            double s_in = 0.0, s_out = 0.0;
            for (std::size_t i = 0; i < n; ++i) (member[i] ? s_in : s_out) += assoc[i];
            if (s_in - s_out > res.statistic) ++above;
            ++count;
            // next combination in lexicographic order
            std::size_t pos = k;
            while (pos > 0) {
                --pos;
                if (comb[pos] != pos + n - k) break;
                if (pos == 0) {
                    pos = k; // done
                    break;
                }
            }
            if (pos == k) break;
            ++comb[pos];
            for (std::size_t t = pos + 1; t < k; ++t) comb[t] = comb[t - 1] + 1;
        }
        res.permutations = count;
        res.exact = true;
        res.p_value = static_cast<double>(above) / static_cast<double>(count);
    } else {
        std::mt19937_64 rng(options.seed);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<bool> member(n);
        for (std::size_t s = 0; s < options.samples; ++s) {
            std::shuffle(order.begin(), order.end(), rng);
            std::fill(member.begin(), member.end(), false);
            for (std::size_t i = 0; i < k; ++i) member[order[i]] = true;
            double s_in = 0.0, s_out = 0.0;
            for (std::size_t i = 0; i < n; ++i) (member[i] ? s_in : s_out) += assoc[i];
            if (s_in - s_out > res.statistic) ++above;
        }
        res.permutations = options.samples;
        res.exact = false;
        res.p_value = static_cast<double>(above) / static_cast<double>(options.samples);
    }
    return res;
}

EctResult ect(const EmbeddingSpace& space, const BiasSpec& spec, const TermLookup& lookup) {
    if (spec.form != AttributeForm::single)
        throw std::invalid_argument("ect: spec must have a single attribute set (merge paired first)");
    const Resolved t1 = resolve(space, spec.t1, lookup);
    const Resolved t2 = resolve(space, spec.t2, lookup);
    const Resolved a = resolve(space, spec.a, lookup);
    EctResult res;
    res.oov = t1.missing + t2.missing + a.missing;
    if (t1.idx.empty() || t2.idx.empty())
        throw std::runtime_error("ect: a target set is empty after vocabulary filtering");
    if (a.idx.size() < 2) throw std::runtime_error("ect: need at least 2 in-vocabulary attribute terms");
    res.attributes_used = a.idx.size();

    const std::size_t d = space.dim();
    auto mean_vec = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> mu(d, 0.0);
        for (std::size_t i : idx) {
            auto row = space.vector_at(i);
            for (std::size_t c = 0; c < d; ++c) mu[c] += row[c];
        }
        for (double& v : mu) v /= static_cast<double>(idx.size());
        return mu;
    };
    const std::vector<double> mu1 = mean_vec(t1.idx);
    const std::vector<double> mu2 = mean_vec(t2.idx);

    std::vector<double> s1, s2;
    s1.reserve(a.idx.size());
    s2.reserve(a.idx.size());
    for (std::size_t ai : a.idx) {
        s1.push_back(cosine(mu1, space.vector_at(ai)));
        s2.push_back(cosine(mu2, space.vector_at(ai)));
    }
    if (auto rho = spearman(s1, s2)) res.value = *rho * 100.0;
    return res;
}

BatResult bat(const EmbeddingSpace& space, const BiasSpec& spec, const TermLookup& lookup) {
    if (spec.form != AttributeForm::paired)
        throw std::invalid_argument("bat: spec must have paired attribute sets");
    const Resolved t1 = resolve(space, spec.t1, lookup);
    const Resolved t2 = resolve(space, spec.t2, lookup);
    const Resolved a1 = resolve(space, spec.a1, lookup);
    const Resolved a2 = resolve(space, spec.a2, lookup);
    BatResult res;
    res.oov = t1.missing + t2.missing + a1.missing + a2.missing;
    if (t1.idx.empty() || t2.idx.empty())
        throw std::runtime_error("bat: a target set is empty after vocabulary filtering");
    if (a1.idx.size() < 2 || a2.idx.size() < 2)
        throw std::runtime_error("bat: attribute sets need at least 2 in-vocabulary terms each");

    const std::size_t d = space.dim();
    std::vector<double> q(d);
    std::size_t wins = 0, comparisons = 0;

    // Query q1 = t1 - t2 + a2: the tuple's a1 should out-rank every other
    // a2' in Euclidean distance. Grouping by (i, j, a2) shares the distance
    // computations across the a1 loop.
    for (std::size_t i : t1.idx) {
        auto vi = space.vector_at(i);
        for (std::size_t j : t2.idx) {
            auto vj = space.vector_at(j);
            for (std::size_t b2 = 0; b2 < a2.idx.size(); ++b2) {
                auto va2 = space.vector_at(a2.idx[b2]);
                for (std::size_t c = 0; c < d; ++c) q[c] = vi[c] - vj[c] + va2[c];
                std::vector<double> dist_a2(a2.idx.size());
                for (std::size_t o = 0; o < a2.idx.size(); ++o)
                    dist_a2[o] = euclidean(q, space.vector_at(a2.idx[o]));
                for (std::size_t b1 = 0; b1 < a1.idx.size(); ++b1) {
                    const double da1 = euclidean(q, space.vector_at(a1.idx[b1]));
                    for (std::size_t o = 0; o < a2.idx.size(); ++o) {
                        if (o == b2) continue;
                        ++comparisons;
                        if (da1 < dist_a2[o]) ++wins; // ties fail
                    }
                }
            }
            // Query q2 = a1 - t1 + t2: the tuple's a2 against every other a1'.
            for (std::size_t b1 = 0; b1 < a1.idx.size(); ++b1) {
                auto va1 = space.vector_at(a1.idx[b1]);
                for (std::size_t c = 0; c < d; ++c) q[c] = va1[c] - vi[c] + vj[c];
                std::vector<double> dist_a1(a1.idx.size());
                for (std::size_t o = 0; o < a1.idx.size(); ++o)
                    dist_a1[o] = euclidean(q, space.vector_at(a1.idx[o]));
                for (std::size_t b2 = 0; b2 < a2.idx.size(); ++b2) {
                    const double da2 = euclidean(q, space.vector_at(a2.idx[b2]));
                    for (std::size_t o = 0; o < a1.idx.size(); ++o) {
                        if (o == b1) continue;
                        ++comparisons;
                        if (da2 < dist_a1[o]) ++wins;
                    }
                }
            }
        }
    }
    if (comparisons == 0) throw std::runtime_error("bat: no comparisons possible");
    res.comparisons = comparisons;
    res.value = 100.0 * static_cast<double>(wins) / static_cast<double>(comparisons);
    return res;
}

ImplicitResult implicit_tests(const EmbeddingSpace& space, const AugmentedSpec& aug,
                              const ImplicitOptions& options) {
    if (options.seeds.empty()) throw std::invalid_argument("implicit_tests: need at least one seed");
    const Resolved test1 = resolve(space, aug.test.t1, options.lookup);
    const Resolved test2 = resolve(space, aug.test.t2, options.lookup);
    if (test1.idx.size() < 2 || test2.idx.size() < 2)
        throw std::runtime_error("implicit_tests: need at least 2 in-vocabulary initial terms per set");
    const Resolved train1 = resolve(space, aug.train.t1, options.lookup);
    const Resolved train2 = resolve(space, aug.train.t2, options.lookup);
    if (train1.idx.empty() || train2.idx.empty())
        throw std::runtime_error("implicit_tests: augmentation terms missing from the space");

    const std::size_t d = space.dim();
    const double gamma = options.svm_gamma > 0.0 ? options.svm_gamma : 1.0 / static_cast<double>(d);

    auto stack = [&](const std::vector<std::size_t>& ia, const std::vector<std::size_t>& ib,
                     std::vector<int>& labels, int la, int lb) {
        Matrix m(ia.size() + ib.size(), d);
        labels.clear();
        std::size_t r = 0;
        for (std::size_t i : ia) {
            auto row = space.vector_at(i);
            std::copy(row.begin(), row.end(), m.data() + r * d);
            labels.push_back(la);
            ++r;
        }
        for (std::size_t i : ib) {
            auto row = space.vector_at(i);
            std::copy(row.begin(), row.end(), m.data() + r * d);
            labels.push_back(lb);
            ++r;
        }
        return m;
    };

    std::vector<int> test_labels01, train_labels;
    const Matrix test_points = stack(test1.idx, test2.idx, test_labels01, 0, 1);
    const Matrix train_points = stack(train1.idx, train2.idx, train_labels, 1, -1);

    ImplicitResult res;
    res.runs = options.seeds.size();
    res.test_terms = test_points.rows();
    res.train_terms = train_points.rows();
    res.test_oov = test1.missing + test2.missing;
    res.train_oov = train1.missing + train2.missing;

    // The SVM path has no stochastic component; trained once, scored once.
    const SvmModel model = svm_fit(train_points, train_labels, options.svm_c, gamma);
    res.svm_converged = model.converged;
    std::size_t svm_correct = 0;
    for (std::size_t i = 0; i < test_points.rows(); ++i) {
        const int pred = svm_predict(model, test_points.row(i));
        const int want = test_labels01[i] == 0 ? 1 : -1;
        if (pred == want) ++svm_correct;
    }
    const double svm_acc = 100.0 * static_cast<double>(svm_correct) / static_cast<double>(test_points.rows());

    double km_sum = 0.0, svm_sum = 0.0;
    for (std::uint64_t seed : options.seeds) {
        const ClusterResult cl = kmeans2(test_points, seed);
        km_sum += cluster_accuracy(cl.assignments, test_labels01);
        svm_sum += svm_acc;
    }
    res.km = km_sum / static_cast<double>(res.runs);
    res.svm = svm_sum / static_cast<double>(res.runs);
    return res;
}

std::vector<BenchmarkPair> load_benchmark(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open benchmark file: " + path.string());
    std::vector<BenchmarkPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    std::size_t score_col = 2;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> tok;
        std::istringstream ss(line);
        std::string t;
        while (ss >> t) tok.push_back(t);
        if (tok.empty()) continue;
        if (first) {
            first = false;
            // SimLex-style header names its score column; other headers are
            // skipped; a plain data line is consumed as data.
            bool header = false;
            for (std::size_t i = 0; i < tok.size(); ++i) {
                if (tok[i] == "SimLex999") {
                    score_col = i;
                    header = true;
                }
            }
            if (!header && tok.size() >= 3) {
                double probe = 0.0;
                auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), probe);
                header = !(ec == std::errc() && p == tok[2].data() + tok[2].size());
            } else if (!header) {
                header = true; // short first line, treat as header
            }
            if (header) continue;
        }
        if (tok.size() <= score_col)
            throw std::runtime_error("benchmark line " + std::to_string(line_no) + " has too few columns");
        double score = 0.0;
        const std::string& sc = tok[score_col];
        auto [p, ec] = std::from_chars(sc.data(), sc.data() + sc.size(), score);
        if (ec != std::errc() || p != sc.data() + sc.size())
            throw std::runtime_error("benchmark line " + std::to_string(line_no) + ": bad score '" + sc + "'");
        pairs.push_back({tok[0], tok[1], score});
    }
    if (pairs.empty()) throw std::runtime_error("benchmark file has no usable pairs: " + path.string());
    return pairs;
}

SemanticQualityResult semantic_quality(const EmbeddingSpace& space,
                                       const std::vector<BenchmarkPair>& benchmark,
                                       const TermLookup& lookup) {
    if (benchmark.empty()) throw std::invalid_argument("semantic_quality: empty benchmark");
    SemanticQualityResult res;
    res.total = benchmark.size();
    std::vector<double> predicted, gold;
    for (const auto& pair : benchmark) {
        const auto i1 = space.index_of(pair.w1, lookup.lowercase_fallback);
        const auto i2 = space.index_of(pair.w2, lookup.lowercase_fallback);
        if (!i1 || !i2) continue;
        predicted.push_back(space.row_cosine(*i1, *i2));
        gold.push_back(pair.gold);
    }
    res.covered = predicted.size();
    if (res.covered == 0) throw std::runtime_error("semantic_quality: no benchmark pair is covered");
    if (res.covered >= 2) {
        if (auto rho = spearman(predicted, gold)) res.value = *rho * 100.0;
    }
    return res;
}

std::string topology_export_csv(const EmbeddingSpace& space, const BiasSpec& spec,
                                const TermLookup& lookup) {
    struct Labeled {
        const std::vector<std::string>* terms;
        const char* label;
    };
    std::vector<Labeled> groups = {{&spec.t1, "t1"}, {&spec.t2, "t2"}};
    if (spec.form == AttributeForm::single) groups.push_back({&spec.a, "a"});
    if (spec.form == AttributeForm::paired) {
        groups.push_back({&spec.a1, "a1"});
        groups.push_back({&spec.a2, "a2"});
    }

    std::vector<std::string> words;
    std::vector<const char*> labels;
    std::vector<std::size_t> rows;
    for (const auto& g : groups) {
        for (const auto& term : *g.terms) {
            if (auto i = space.index_of(term, lookup.lowercase_fallback)) {
                words.push_back(term);
                labels.push_back(g.label);
                rows.push_back(*i);
            }
        }
    }
    if (rows.size() < 2) throw std::runtime_error("topology export: fewer than 2 spec terms in vocabulary");

    Matrix points(rows.size(), space.dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto row = space.vector_at(rows[r]);
        std::copy(row.begin(), row.end(), points.data() + r * space.dim());
    }
    const Pca2dResult pca = pca_2d(points);

    std::string csv = "word,set,pc1,pc2\n";
    char buf[96];
    for (std::size_t r = 0; r < rows.size(); ++r) {
        csv += words[r];
        csv += ',';
        csv += labels[r];
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", pca.coords(r, 0), pca.coords(r, 1));
        csv += buf;
    }
    return csv;
}

} // namespace debie
