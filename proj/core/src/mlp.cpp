#include "ratectl/mlp.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ratectl {

namespace {

constexpr char kMlpMagic[8] = {'R', 'C', 'T', 'L', 'M', 'L', 'P', '\0'};
constexpr std::uint32_t kMlpVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return value;
}

}  // namespace

void MlpSpec::validate() const {
    if (layer_sizes.size() < 3) {
        throw std::invalid_argument("mlp needs at least one hidden layer");
    }
    for (int size : layer_sizes) {
        if (size < 1) throw std::invalid_argument("mlp layer sizes must be >= 1");
    }
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    int total = 0;
    for (int l = 0; l < spec_.n_layers(); ++l) {
        const int fan_in = spec_.layer_sizes[l];
        const int fan_out = spec_.layer_sizes[l + 1];
        weight_offsets_.push_back(total);
        total += fan_in * fan_out;
        bias_offsets_.push_back(total);
        total += fan_out;
    }
    params_.assign(total, 0.0);
}

void Mlp::init_random(std::mt19937_64& rng) {
    for (int l = 0; l < spec_.n_layers(); ++l) {
        const int fan_in = spec_.layer_sizes[l];
        const int fan_out = spec_.layer_sizes[l + 1];
        const bool final_layer = (l == spec_.n_layers() - 1);
        const double bound = final_layer ? 3e-3 : 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        double* w = params_.data() + weight_offsets_[l];
        for (int i = 0; i < fan_in * fan_out; ++i) w[i] = dist(rng);
        double* b = params_.data() + bias_offsets_[l];
        for (int i = 0; i < fan_out; ++i) b[i] = dist(rng);
    }
}

std::vector<double> Mlp::forward(std::span<const double> input, Cache* cache) const {
    if (input.size() != static_cast<std::size_t>(spec_.input_dim())) {
        throw std::invalid_argument("mlp input dimension mismatch");
    }
    if (cache) {
        cache->inputs.assign(spec_.n_layers(), {});
        cache->pre.assign(spec_.n_layers(), {});
    }

    std::vector<double> activation(input.begin(), input.end());
    for (int l = 0; l < spec_.n_layers(); ++l) {
        const int fan_in = spec_.layer_sizes[l];
        const int fan_out = spec_.layer_sizes[l + 1];
        const double* w = params_.data() + weight_offsets_[l];
        const double* b = params_.data() + bias_offsets_[l];

        std::vector<double> pre(fan_out);
        for (int o = 0; o < fan_out; ++o) {
            double acc = b[o];
            const double* row = w + o * fan_in;
            for (int i = 0; i < fan_in; ++i) acc += row[i] * activation[i];
            pre[o] = acc;
        }

        if (cache) {
            cache->inputs[l] = activation;
            cache->pre[l] = pre;
        }

        const bool final_layer = (l == spec_.n_layers() - 1);
        if (!final_layer) {
            for (double& x : pre) x = x > 0.0 ? x : 0.0;  // ReLU
        } else if (spec_.output_activation == OutputActivation::tanh_bounded) {
            for (double& x : pre) x = std::tanh(x);
        }
        activation = std::move(pre);
    }
    if (cache) cache->output = activation;
    return activation;
}

void Mlp::backward(const Cache& cache, std::span<const double> output_grad,
                   std::span<double> param_grad, std::span<double> input_grad) const {
    if (output_grad.size() != static_cast<std::size_t>(spec_.output_dim())) {
        throw std::invalid_argument("output gradient dimension mismatch");
    }
    if (param_grad.size() != params_.size()) {
        throw std::invalid_argument("parameter gradient size mismatch");
    }

    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (int l = spec_.n_layers() - 1; l >= 0; --l) {
        const int fan_in = spec_.layer_sizes[l];
        const int fan_out = spec_.layer_sizes[l + 1];
        const bool final_layer = (l == spec_.n_layers() - 1);

        // Push delta through the layer's activation.
        if (!final_layer) {
            for (int o = 0; o < fan_out; ++o) {
                if (cache.pre[l][o] <= 0.0) delta[o] = 0.0;
            }
        } else if (spec_.output_activation == OutputActivation::tanh_bounded) {
            for (int o = 0; o < fan_out; ++o) {
                const double y = std::tanh(cache.pre[l][o]);
                delta[o] *= 1.0 - y * y;
            }
        }

        const double* w = params_.data() + weight_offsets_[l];
        double* wg = param_grad.data() + weight_offsets_[l];
        double* bg = param_grad.data() + bias_offsets_[l];
        const std::vector<double>& layer_in = cache.inputs[l];

        for (int o = 0; o < fan_out; ++o) {
            const double d = delta[o];
            double* row = wg + o * fan_in;
            for (int i = 0; i < fan_in; ++i) row[i] += d * layer_in[i];
            bg[o] += d;
        }

        std::vector<double> prev(fan_in, 0.0);
        for (int o = 0; o < fan_out; ++o) {
            const double d = delta[o];
            const double* row = w + o * fan_in;
            for (int i = 0; i < fan_in; ++i) prev[i] += d * row[i];
        }
        delta = std::move(prev);
    }

    if (!input_grad.empty()) {
        if (input_grad.size() != static_cast<std::size_t>(spec_.input_dim())) {
            throw std::invalid_argument("input gradient size mismatch");
        }
        std::memcpy(input_grad.data(), delta.data(), delta.size() * sizeof(double));
    }
}

AdamOptimizer::AdamOptimizer(int param_count, AdamConfig config)
    : config_(config), m_(param_count, 0.0), v_(param_count, 0.0) {}

void AdamOptimizer::update(std::span<double> params, std::span<const double> grad, bool ascend) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw std::invalid_argument("adam update size mismatch");
    }
    ++step_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    const double sign = ascend ? 1.0 : -1.0;

    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        m_[i] = b1 * m_[i] + (1.0 - b1) * g;
        v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
        const double m_hat = m_[i] / correction1;
        const double v_hat = v_[i] / correction2;
        params[i] += sign * config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
}

void AdamOptimizer::restore(std::span<const double> m, std::span<const double> v,
                            std::int64_t step) {
    if (m.size() != m_.size() || v.size() != v_.size()) {
        throw std::runtime_error("adam state size mismatch");
    }
    std::copy(m.begin(), m.end(), m_.begin());
    std::copy(v.begin(), v.end(), v_.begin());
    step_ = step;
}

void soft_update(std::span<double> target, std::span<const double> online, double tau) {
    if (target.size() != online.size()) {
        throw std::invalid_argument("soft_update size mismatch");
    }
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw std::invalid_argument("tau must lie in (0, 1]");
    }
    for (std::size_t i = 0; i < target.size(); ++i) {
        target[i] = tau * online[i] + (1.0 - tau) * target[i];
    }
}

void save_mlp(std::ostream& out, const Mlp& net) {
    out.write(kMlpMagic, sizeof(kMlpMagic));
    write_pod(out, kMlpVersion);
    write_pod(out, static_cast<std::uint32_t>(net.spec().layer_sizes.size()));
    for (int size : net.spec().layer_sizes) write_pod(out, static_cast<std::int32_t>(size));
    write_pod(out, static_cast<std::uint8_t>(net.spec().output_activation));
    const auto params = net.params();
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
}

Mlp load_mlp(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMlpMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not an mlp checkpoint (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kMlpVersion) {
        throw std::runtime_error("unsupported mlp checkpoint version " + std::to_string(version));
    }
    MlpSpec spec;
    const auto n = read_pod<std::uint32_t>(in);
    spec.layer_sizes.resize(n);
    for (auto& size : spec.layer_sizes) size = read_pod<std::int32_t>(in);
    spec.output_activation = static_cast<OutputActivation>(read_pod<std::uint8_t>(in));

    Mlp net(spec);
    in.read(reinterpret_cast<char*>(net.params().data()),
            static_cast<std::streamsize>(net.params().size() * sizeof(double)));
    if (!in) throw std::runtime_error("mlp checkpoint truncated");
    return net;
}

void load_mlp_into(std::istream& in, Mlp& net) {
    Mlp loaded = load_mlp(in);
    if (!(loaded.spec() == net.spec())) {
        throw std::runtime_error("mlp checkpoint shape mismatch");
    }
    std::copy(loaded.params().begin(), loaded.params().end(), net.params().begin());
}

}  // namespace ratectl
