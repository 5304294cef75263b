#include "debie/debias_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "debie/matrix.hpp"
#include "debie/serialize.hpp"

namespace debie {

using nlohmann::json;

namespace {

struct LayerShape {
    std::size_t out, in;
    std::size_t w_off, b_off;
};

// Shapes: W0 (h x d), b0; W1..W_{H-1} (h x h), b; Wout (d x h), bout.
std::vector<LayerShape> layer_shapes(const NetConfig& c) {
    if (c.dim == 0) throw std::invalid_argument("net: dim must be positive");
    if (c.hidden_layers == 0) throw std::invalid_argument("net: need at least one hidden layer");
    if (c.hidden_width == 0) throw std::invalid_argument("net: hidden width must be positive");
    std::vector<LayerShape> shapes;
    std::size_t off = 0;
    auto push = [&](std::size_t out, std::size_t in) {
        shapes.push_back({out, in, off, off + out * in});
        off += out * in + out;
    };
    push(c.hidden_width, c.dim);
    for (std::size_t l = 1; l < c.hidden_layers; ++l) push(c.hidden_width, c.hidden_width);
    push(c.dim, c.hidden_width);
    return shapes;
}

std::size_t total_params(const std::vector<LayerShape>& shapes) {
    const auto& last = shapes.back();
    return last.b_off + last.out;
}

double activate(Activation a, double x) {
    return a == Activation::tanh_act ? std::tanh(x) : x;
}

// Derivative expressed through the activated value (cheap for tanh).
double activate_grad(Activation a, double post) {
    return a == Activation::tanh_act ? 1.0 - post * post : 1.0;
}

struct ForwardCache {
    std::vector<std::vector<double>> post; // activated hidden outputs per layer
    std::vector<double> output;
};

ForwardCache forward_cached(const NetConfig& cfg, std::span<const double> params,
                            const std::vector<LayerShape>& shapes, std::span<const double> x) {
    ForwardCache cache;
    cache.post.resize(cfg.hidden_layers);
    std::span<const double> cur = x;
    for (std::size_t l = 0; l < cfg.hidden_layers; ++l) {
        const auto& sh = shapes[l];
        auto& out = cache.post[l];
        out.resize(sh.out);
        for (std::size_t i = 0; i < sh.out; ++i) {
            const double* w = params.data() + sh.w_off + i * sh.in;
            double s = params[sh.b_off + i];
            for (std::size_t j = 0; j < sh.in; ++j) s += w[j] * cur[j];
            out[i] = activate(cfg.activation, s);
        }
        cur = out;
    }
    const auto& sh = shapes.back();
    cache.output.assign(x.begin(), x.end()); // skip connection
    for (std::size_t i = 0; i < sh.out; ++i) {
        const double* w = params.data() + sh.w_off + i * sh.in;
        double s = params[sh.b_off + i];
        for (std::size_t j = 0; j < sh.in; ++j) s += w[j] * cur[j];
        cache.output[i] += s;
    }
    return cache;
}

// dJ/dparams contribution for one input given dJ/doutput; the skip term
// only feeds the input, which carries no parameters.
void backward(const NetConfig& cfg, std::span<const double> params, const std::vector<LayerShape>& shapes,
              std::span<const double> x, const ForwardCache& cache, std::span<const double> g_out,
              std::span<double> grad) {
    const auto& out_sh = shapes.back();
    const std::vector<double>& last_hidden = cache.post[cfg.hidden_layers - 1];
    std::vector<double> g(last_hidden.size(), 0.0);
    for (std::size_t i = 0; i < out_sh.out; ++i) {
        const double gi = g_out[i];
        double* gw = grad.data() + out_sh.w_off + i * out_sh.in;
        for (std::size_t j = 0; j < out_sh.in; ++j) gw[j] += gi * last_hidden[j];
        grad[out_sh.b_off + i] += gi;
        const double* w = params.data() + out_sh.w_off + i * out_sh.in;
        for (std::size_t j = 0; j < out_sh.in; ++j) g[j] += gi * w[j];
    }
    for (std::size_t l = cfg.hidden_layers; l-- > 0;) {
        const auto& sh = shapes[l];
        const std::vector<double>& post = cache.post[l];
        std::span<const double> below = l == 0 ? x : std::span<const double>(cache.post[l - 1]);
        std::vector<double> g_below(l == 0 ? 0 : sh.in, 0.0);
        for (std::size_t i = 0; i < sh.out; ++i) {
            const double gp = g[i] * activate_grad(cfg.activation, post[i]);
            if (gp == 0.0) continue;
            double* gw = grad.data() + sh.w_off + i * sh.in;
            for (std::size_t j = 0; j < sh.in; ++j) gw[j] += gp * below[j];
            grad[sh.b_off + i] += gp;
            if (l > 0) {
                const double* w = params.data() + sh.w_off + i * sh.in;
                for (std::size_t j = 0; j < sh.in; ++j) g_below[j] += gp * w[j];
            }
        }
        if (l > 0) g = std::move(g_below);
    }
}

double clamped_norm(std::span<const double> v, bool& clamped) {
    const double n = norm2(v);
    if (n < 1e-12) {
        clamped = true;
        return 1e-12;
    }
    return n;
}

// cos(u, v) together with its gradients wrt u and v, norms clamped. The
// value is clamped into [-1, 1] so rounding cannot push the drift terms
// 1 - cos below zero.
double cos_with_grads(std::span<const double> u, std::span<const double> v, std::vector<double>* du,
                      std::vector<double>* dv, bool& clamped) {
    const double nu = clamped_norm(u, clamped);
    const double nv = clamped_norm(v, clamped);
    const double d = dot(u, v);
    const double c = std::clamp(d / (nu * nv), -1.0, 1.0);
    if (du) {
        du->resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) (*du)[i] = v[i] / (nu * nv) - c * u[i] / (nu * nu);
    }
    if (dv) {
        dv->resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) (*dv)[i] = u[i] / (nu * nv) - c * v[i] / (nv * nv);
    }
    return c;
}

std::span<const double> triple_vec(const EmbeddingSpace& space, std::size_t idx) {
    if (idx >= space.size()) throw std::out_of_range("triple index out of range");
    return space.vector_at(idx);
}

} // namespace

DebiasNetwork::DebiasNetwork(const NetConfig& config) : config_(config) {
    params_.assign(total_params(layer_shapes(config_)), 0.0);
    init_parameters();
}

void DebiasNetwork::init_parameters() {
    const auto shapes = layer_shapes(config_);
    std::mt19937_64 rng(config_.seed);
    // Hidden layers: Xavier-uniform. Output layer stays zero so the initial
    // network is exactly the identity map.
    for (std::size_t l = 0; l < config_.hidden_layers; ++l) {
        const auto& sh = shapes[l];
        const double bound = std::sqrt(6.0 / static_cast<double>(sh.in + sh.out));
        std::uniform_real_distribution<double> unif(-bound, bound);
        for (std::size_t i = 0; i < sh.out * sh.in; ++i) params_[sh.w_off + i] = unif(rng);
    }
}

std::vector<double> DebiasNetwork::forward(std::span<const double> x) const {
    if (x.size() != config_.dim) throw std::invalid_argument("forward: dimension mismatch");
    return forward_cached(config_, params_, layer_shapes(config_), x).output;
}

LossParts DebiasNetwork::loss(const TrainingTriple& triple, const EmbeddingSpace& space) const {
    LossParts parts;
    auto t1 = triple_vec(space, triple.t1);
    auto t2 = triple_vec(space, triple.t2);
    auto a = triple_vec(space, triple.a);
    const auto o1 = forward(t1);
    const auto o2 = forward(t2);
    const auto oa = forward(a);
    bool clamped = false;
    const double c1 = cos_with_grads(o1, oa, nullptr, nullptr, clamped);
    const double c2 = cos_with_grads(o2, oa, nullptr, nullptr, clamped);
    const double r1 = cos_with_grads(t1, o1, nullptr, nullptr, clamped);
    const double r2 = cos_with_grads(t2, o2, nullptr, nullptr, clamped);
    const double ra = cos_with_grads(a, oa, nullptr, nullptr, clamped);
    parts.l_d = (c2 - c1) * (c2 - c1);
    parts.l_r = (1.0 - r1) + (1.0 - r2) + (1.0 - ra);
    parts.j = parts.l_d + config_.lambda * parts.l_r;
    parts.norm_clamped = clamped;
    return parts;
}

LossParts DebiasNetwork::accumulate_gradient(const TrainingTriple& triple, const EmbeddingSpace& space,
                                             std::span<double> grad) const {
    if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");
    const auto shapes = layer_shapes(config_);
    auto t1 = triple_vec(space, triple.t1);
    auto t2 = triple_vec(space, triple.t2);
    auto a = triple_vec(space, triple.a);
    const ForwardCache f1 = forward_cached(config_, params_, shapes, t1);
    const ForwardCache f2 = forward_cached(config_, params_, shapes, t2);
    const ForwardCache fa = forward_cached(config_, params_, shapes, a);
    const auto& o1 = f1.output;
    const auto& o2 = f2.output;
    const auto& oa = fa.output;

    bool clamped = false;
    std::vector<double> dc1_do1, dc1_doa, dc2_do2, dc2_doa;
    const double c1 = cos_with_grads(o1, oa, &dc1_do1, &dc1_doa, clamped);
    const double c2 = cos_with_grads(o2, oa, &dc2_do2, &dc2_doa, clamped);
    std::vector<double> dr1_do1, dr2_do2, dra_doa;
    const double r1 = cos_with_grads(t1, o1, nullptr, &dr1_do1, clamped);
    const double r2 = cos_with_grads(t2, o2, nullptr, &dr2_do2, clamped);
    const double ra = cos_with_grads(a, oa, nullptr, &dra_doa, clamped);

    LossParts parts;
    parts.l_d = (c2 - c1) * (c2 - c1);
    parts.l_r = (1.0 - r1) + (1.0 - r2) + (1.0 - ra);
    parts.j = parts.l_d + config_.lambda * parts.l_r;
    parts.norm_clamped = clamped;

    const double gap = 2.0 * (c2 - c1); // dL_D/dc2; dL_D/dc1 is its negation
    const std::size_t d = config_.dim;
    std::vector<double> g1(d), g2(d), ga(d);
    for (std::size_t i = 0; i < d; ++i) {
        g1[i] = -gap * dc1_do1[i] + config_.lambda * (-dr1_do1[i]);
        g2[i] = gap * dc2_do2[i] + config_.lambda * (-dr2_do2[i]);
        ga[i] = -gap * dc1_doa[i] + gap * dc2_doa[i] + config_.lambda * (-dra_doa[i]);
    }
    backward(config_, params_, shapes, t1, f1, g1, grad);
    backward(config_, params_, shapes, t2, f2, g2, grad);
    backward(config_, params_, shapes, a, fa, ga, grad);
    return parts;
}

std::vector<TrainingTriple> build_triples(const BiasSpec& spec, const EmbeddingSpace& space,
                                          TripleBuildInfo* info) {
    if (spec.form != AttributeForm::single)
        throw std::invalid_argument("build_triples: spec must have a single attribute set");
    TripleBuildInfo local;
    TripleBuildInfo& out_info = info ? *info : local;
    out_info = TripleBuildInfo{};

    auto resolve = [&](const std::vector<std::string>& terms, std::size_t& used, std::size_t& missing) {
        std::vector<std::size_t> idx;
        for (const auto& t : terms) {
            if (auto i = space.index_of(t))
                idx.push_back(*i);
            else
                ++missing;
        }
        used = idx.size();
        return idx;
    };
    const auto t1 = resolve(spec.t1, out_info.t1_used, out_info.t1_missing);
    const auto t2 = resolve(spec.t2, out_info.t2_used, out_info.t2_missing);
    const auto a = resolve(spec.a, out_info.a_used, out_info.a_missing);
    if (t1.empty() || t2.empty() || a.empty())
        throw std::runtime_error("build_triples: a term set is empty after vocabulary filtering");

    std::vector<TrainingTriple> triples;
    triples.reserve(t1.size() * t2.size() * a.size());
    for (std::size_t i : t1)
        for (std::size_t j : t2)
            for (std::size_t k : a) triples.push_back({i, j, k});
    return triples;
}

double grad_check(const DebiasNetwork& net, const TrainingTriple& triple, const EmbeddingSpace& space,
                  double epsilon, std::size_t param_sample, std::uint64_t sample_seed) {
    if (epsilon < 1e-7 || epsilon > 1e-4)
        throw std::invalid_argument("grad_check: epsilon outside [1e-7, 1e-4]");
    std::vector<double> analytic(net.parameter_count(), 0.0);
    net.accumulate_gradient(triple, space, analytic);

    std::vector<std::size_t> which(net.parameter_count());
    std::iota(which.begin(), which.end(), 0);
    if (param_sample > 0 && param_sample < which.size()) {
        std::mt19937_64 rng(sample_seed);
        std::shuffle(which.begin(), which.end(), rng);
        which.resize(param_sample);
    }

    DebiasNetwork probe = net;
    auto params = probe.parameters();
    double max_rel = 0.0;
    for (std::size_t p : which) {
        const double saved = params[p];
        params[p] = saved + epsilon;
        const double plus = probe.loss(triple, space).j;
        params[p] = saved - epsilon;
        const double minus = probe.loss(triple, space).j;
        params[p] = saved;
        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double ga = analytic[p];
        const double scale = std::max(std::abs(ga), std::abs(numeric));
        if (scale < 1e-7) continue; // both effectively zero
        max_rel = std::max(max_rel, std::abs(ga - numeric) / std::max(scale, 1e-4));
    }
    return max_rel;
}

TrainResult train(DebiasNetwork& net, const std::vector<TrainingTriple>& triples,
                  const EmbeddingSpace& space) {
    if (triples.empty()) throw std::invalid_argument("train: need at least one triple");
    const NetConfig& cfg = net.config();
    TrainResult result;

    auto evaluate = [&] {
        EpochStats stats;
        for (const auto& t : triples) {
            const LossParts parts = net.loss(t, space);
            stats.mean_l_d += parts.l_d;
            stats.mean_l_r += parts.l_r;
            stats.mean_j += parts.j;
        }
        const double n = static_cast<double>(triples.size());
        stats.mean_l_d /= n;
        stats.mean_l_r /= n;
        stats.mean_j /= n;
        return stats;
    };
    result.curve.push_back(evaluate());

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(net.parameter_count());
    auto params = net.parameters();

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_j = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const LossParts parts = net.accumulate_gradient(triples[order[b]], space, grad);
                batch_j += parts.j;
            }
            if (!std::isfinite(batch_j))
                throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
            const double scale = cfg.learning_rate / static_cast<double>(stop - start);
            for (std::size_t p = 0; p < params.size(); ++p) {
                params[p] -= scale * grad[p];
                if (!std::isfinite(params[p]))
                    throw std::runtime_error("train: parameters diverged at epoch " + std::to_string(epoch));
            }
        }
        result.curve.push_back(evaluate());
    }
    return result;
}

EmbeddingSpace apply_net(const DebiasNetwork& net, const EmbeddingSpace& space) {
    if (space.dim() != net.dim()) throw std::invalid_argument("apply_net: dimension mismatch");
    Matrix out(space.size(), space.dim());
    for (std::size_t r = 0; r < space.size(); ++r) {
        const auto y = net.forward(space.vector_at(r));
        std::copy(y.begin(), y.end(), out.data() + r * space.dim());
    }
    return space.with_matrix(std::move(out), false);
}

std::string loss_curve_csv(const TrainResult& result) {
    std::string csv = "epoch,mean_l_d,mean_l_r,mean_j\n";
    char buf[128];
    for (std::size_t e = 0; e < result.curve.size(); ++e) {
        const auto& s = result.curve[e];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", e, s.mean_l_d, s.mean_l_r, s.mean_j);
        csv += buf;
    }
    return csv;
}

std::string write_checkpoint(const DebiasNetwork& net) {
    const NetConfig& c = net.config();
    json j;
    j["kind"] = "dbn";
    j["dim"] = c.dim;
    j["hidden_width"] = c.hidden_width;
    j["hidden_layers"] = c.hidden_layers;
    j["activation"] = c.activation == Activation::tanh_act ? "tanh" : "identity";
    j["hyperparams"] = {{"lambda", c.lambda},
                        {"learning_rate", c.learning_rate},
                        {"epochs", c.epochs},
                        {"batch_size", c.batch_size},
                        {"seed", c.seed}};
    j["payload_hex"] = doubles_to_hex(net.parameters());
    return j.dump(2) + "\n";
}

DebiasNetwork read_checkpoint(const std::string& json_text) {
    json j = json::parse(json_text);
    if (j.value("kind", "") != "dbn") throw std::runtime_error("not a network checkpoint");
    NetConfig c;
    c.dim = j.at("dim").get<std::size_t>();
    c.hidden_width = j.at("hidden_width").get<std::size_t>();
    c.hidden_layers = j.at("hidden_layers").get<std::size_t>();
    const std::string act = j.value("activation", "tanh");
    if (act == "tanh")
        c.activation = Activation::tanh_act;
    else if (act == "identity")
        c.activation = Activation::identity;
    else
        throw std::runtime_error("unknown activation: " + act);
    const json& h = j.at("hyperparams");
    c.lambda = h.value("lambda", 0.2);
    c.learning_rate = h.value("learning_rate", 1e-3);
    c.epochs = h.value("epochs", 50u);
    c.batch_size = h.value("batch_size", 64u);
    c.seed = h.value("seed", 42u);

    DebiasNetwork net(c);
    std::vector<double> payload = hex_to_doubles(j.at("payload_hex").get<std::string>());
    if (payload.size() != net.parameter_count())
        throw std::runtime_error("checkpoint payload size mismatch");
    std::copy(payload.begin(), payload.end(), net.params_.begin());
    return net;
}

} // namespace debie
