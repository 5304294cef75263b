#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "debie/bias_spec.hpp"
#include "debie/embedding.hpp"

namespace debie {

enum class Activation { tanh_act, identity };

struct NetConfig {
    std::size_t dim = 0;
    std::size_t hidden_width = 300;
    std::size_t hidden_layers = 5;
    Activation activation = Activation::tanh_act;
    double lambda = 0.2;       // drift-regularizer weight
    double learning_rate = 1e-3;
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    std::uint64_t seed = 42;
};

struct TrainingTriple {
    std::size_t t1, t2, a; // row indices into the space
};

struct LossParts {
    double l_d = 0.0; // squared attribute-distance gap
    double l_r = 0.0; // drift from the original vectors
    double j = 0.0;   // l_d + lambda * l_r
    bool norm_clamped = false;
};

struct EpochStats {
    double mean_l_d = 0.0, mean_l_r = 0.0, mean_j = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> curve; // entry 0 is the pre-training evaluation
};

// Residual map y = x + W_out * act(...) + b_out. The output layer starts at
// zero, so a freshly constructed network is exactly the identity; hidden
// layers get seeded Xavier weights so gradients flow from the first step.
class DebiasNetwork {
public:
    explicit DebiasNetwork(const NetConfig& config);

    const NetConfig& config() const { return config_; }
    std::size_t dim() const { return config_.dim; }

    std::vector<double> forward(std::span<const double> x) const;

    // Loss for one triple; primed vectors are network outputs.
    LossParts loss(const TrainingTriple& triple, const EmbeddingSpace& space) const;

    // Accumulates dJ/dparams for one triple into grad (sized like params).
    LossParts accumulate_gradient(const TrainingTriple& triple, const EmbeddingSpace& space,
                                  std::span<double> grad) const;

    std::size_t parameter_count() const { return params_.size(); }
    std::span<const double> parameters() const { return params_; }
    std::span<double> parameters() { return params_; }

private:
    void init_parameters();
    NetConfig config_;
    std::vector<double> params_; // W0,b0, W1,b1, ..., Wout,bout (row-major)
    friend DebiasNetwork read_checkpoint(const std::string&);
};

// Full Cartesian product of the in-vocabulary terms of a single-attribute
// explicit spec, in deterministic (t1, t2, a) loop order. Throws if any set
// is empty after OOV filtering.
struct TripleBuildInfo {
    std::size_t t1_used = 0, t2_used = 0, a_used = 0;
    std::size_t t1_missing = 0, t2_missing = 0, a_missing = 0;
};
std::vector<TrainingTriple> build_triples(const BiasSpec& spec, const EmbeddingSpace& space,
                                          TripleBuildInfo* info = nullptr);

// Central-difference check of the analytic gradient. Returns the max
// relative error over the checked parameters; param_sample > 0 checks a
// seeded random subset instead of every parameter.
double grad_check(const DebiasNetwork& net, const TrainingTriple& triple, const EmbeddingSpace& space,
                  double epsilon, std::size_t param_sample = 0, std::uint64_t sample_seed = 0);

// Mini-batch gradient descent with per-epoch seeded shuffling. Aborts with
// the epoch number if the loss or any parameter goes non-finite.
TrainResult train(DebiasNetwork& net, const std::vector<TrainingTriple>& triples,
                  const EmbeddingSpace& space);

EmbeddingSpace apply_net(const DebiasNetwork& net, const EmbeddingSpace& space);

std::string loss_curve_csv(const TrainResult& result);

// Checkpoint files: JSON header + hex float payload, bit-exact round-trip.
std::string write_checkpoint(const DebiasNetwork& net);
DebiasNetwork read_checkpoint(const std::string& json_text);

} // namespace debie
