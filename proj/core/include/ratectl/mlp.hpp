#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace ratectl {

enum class OutputActivation { tanh_bounded, linear };

struct MlpSpec {
    std::vector<int> layer_sizes;  // input, hidden..., output
    OutputActivation output_activation = OutputActivation::linear;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int n_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }

    // Requires at least one hidden layer and all sizes >= 1.
    void validate() const;

    bool operator==(const MlpSpec&) const = default;
};

// Fully connected net with ReLU hidden layers, stored as one flat parameter
// vector (per layer: row-major weights, then biases). forward is pure; the
// cache it fills carries what backward needs.
class Mlp {
public:
    explicit Mlp(MlpSpec spec);

    const MlpSpec& spec() const { return spec_; }
    int param_count() const { return static_cast<int>(params_.size()); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    // Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, final layer
    // [-3e-3, 3e-3] to keep early outputs small.
    void init_random(std::mt19937_64& rng);

    struct Cache {
        std::vector<std::vector<double>> inputs;  // inputs[l]: activation entering layer l
        std::vector<std::vector<double>> pre;     // pre[l]: pre-activation of layer l
        std::vector<double> output;
    };

    std::vector<double> forward(std::span<const double> input, Cache* cache = nullptr) const;

    // Gradients of <output_grad, output> w.r.t. parameters and input.
    // param_grad accumulates (callers zero it between batches); input_grad,
    // when non-empty, is overwritten.
    void backward(const Cache& cache, std::span<const double> output_grad,
                  std::span<double> param_grad, std::span<double> input_grad = {}) const;

    int weight_offset(int layer) const { return weight_offsets_[layer]; }
    int bias_offset(int layer) const { return bias_offsets_[layer]; }

private:
    MlpSpec spec_;
    std::vector<double> params_;
    std::vector<int> weight_offsets_;
    std::vector<int> bias_offsets_;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Bias-corrected Adam. `ascend` flips the sign for gradient ascent.
class AdamOptimizer {
public:
    AdamOptimizer(int param_count, AdamConfig config);

    void update(std::span<double> params, std::span<const double> grad, bool ascend = false);

    std::int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return config_; }

    // Serialization access.
    std::span<const double> first_moment() const { return m_; }
    std::span<const double> second_moment() const { return v_; }
    void restore(std::span<const double> m, std::span<const double> v, std::int64_t step);

private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::int64_t step_ = 0;
};

// target <- tau * online + (1 - tau) * target, elementwise.
void soft_update(std::span<double> target, std::span<const double> online, double tau);

// Checkpoint chunk: magic, format version, dims, then parameters as 64-bit
// floats in layer order.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);
// Loads into an existing net; throws std::runtime_error on any shape mismatch.
void load_mlp_into(std::istream& in, Mlp& net);

}  // namespace ratectl
