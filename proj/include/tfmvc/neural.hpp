#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Minimal feed-forward evidential networks with hand-written reverse-mode
// gradients. Forward passes leave the network const and write activations
// into caller-owned trace objects, so frozen nets can be evaluated from
// multiple threads.

namespace tfmvc::nn {

enum class Activation { Identity, Relu, Softplus };

double apply_activation(Activation act, double z);
double activation_grad(Activation act, double z);

struct DenseLayer {
  std::size_t in_dim = 0, out_dim = 0;
  Activation act = Activation::Identity;
  std::vector<double> w;  // in_dim x out_dim, w[i * out_dim + j]
  std::vector<double> b;  // out_dim

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation a);
};

struct DenseTrace {
  std::vector<double> input;
  std::vector<double> preact;
  std::vector<double> output;
};

struct DenseGrad {
  std::vector<double> dw, db;
  void init(const DenseLayer& layer);
  void zero();
};

std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& x,
                                  DenseTrace* trace = nullptr);
// Accumulates parameter gradients into grad (may be null) and returns dL/dx.
std::vector<double> dense_backward(const DenseLayer& layer, const DenseTrace& trace,
                                   const std::vector<double>& dout, DenseGrad* grad);

// out_j = act( left^T W_j right + b_j ), W stored as
// w[(i * right_dim + r) * out_dim + j].
struct BilinearLayer {
  std::size_t left_dim = 0, right_dim = 0, out_dim = 0;
  Activation act = Activation::Identity;
  std::vector<double> w;
  std::vector<double> b;

  BilinearLayer() = default;
  BilinearLayer(std::size_t left, std::size_t right, std::size_t out, Activation a);
};

struct BilinearTrace {
  std::vector<double> left, right;
  std::vector<double> preact;
  std::vector<double> output;
};

struct BilinearGrad {
  std::vector<double> dw, db;
  void init(const BilinearLayer& layer);
  void zero();
};

struct BilinearInputGrad {
  std::vector<double> dleft, dright;
};

std::vector<double> bilinear_forward(const BilinearLayer& layer, const std::vector<double>& left,
                                     const std::vector<double>& right,
                                     BilinearTrace* trace = nullptr);
BilinearInputGrad bilinear_backward(const BilinearLayer& layer, const BilinearTrace& trace,
                                    const std::vector<double>& dout, BilinearGrad* grad);

// features -> relu hidden -> softplus evidence head (K outputs).
struct FunctionalNet {
  DenseLayer hidden;  // relu
  DenseLayer head;    // softplus

  FunctionalNet() = default;
  FunctionalNet(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes);
  std::size_t input_dim() const { return hidden.in_dim; }
  std::size_t num_classes() const { return head.out_dim; }
};

struct FunctionalTrace {
  DenseTrace hidden, head;
};

struct FunctionalGrad {
  DenseGrad hidden, head;
  void init(const FunctionalNet& net);
  void zero();
};

std::vector<double> functional_forward(const FunctionalNet& net, const std::vector<double>& x,
                                       FunctionalTrace* trace = nullptr);
std::vector<double> functional_backward(const FunctionalNet& net, const FunctionalTrace& trace,
                                        const std::vector<double>& devidence,
                                        FunctionalGrad* grad);

// features -> relu encoder -> bilinear with the K+1 opinion vector
// [belief; uncertainty] -> relu -> softplus head emitting 2 evidences.
struct ReferralNet {
  DenseLayer encoder;  // relu
  BilinearLayer mix;   // relu
  DenseLayer head;     // softplus, 2 outputs

  ReferralNet() = default;
  ReferralNet(std::size_t input_dim, std::size_t num_classes, std::size_t encoder_dim,
              std::size_t mix_dim);
  std::size_t input_dim() const { return encoder.in_dim; }
  std::size_t opinion_dim() const { return mix.right_dim; }
};

struct ReferralTrace {
  DenseTrace encoder;
  BilinearTrace mix;
  DenseTrace head;
};

struct ReferralGrad {
  DenseGrad encoder;
  BilinearGrad mix;
  DenseGrad head;
  void init(const ReferralNet& net);
  void zero();
};

std::vector<double> referral_forward(const ReferralNet& net, const std::vector<double>& x,
                                     const std::vector<double>& opinion,
                                     ReferralTrace* trace = nullptr);
// Returns dL/d opinion (the K+1 input); dL/dx is discarded.
std::vector<double> referral_backward(const ReferralNet& net, const ReferralTrace& trace,
                                      const std::vector<double>& devidence, ReferralGrad* grad);

// Named view of one parameter tensor; shape is informational.
struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double>* data = nullptr;
};

std::vector<TensorRef> param_refs(FunctionalNet& net, const std::string& prefix);
std::vector<TensorRef> param_refs(ReferralNet& net, const std::string& prefix);
std::vector<const std::vector<double>*> grad_refs(const FunctionalGrad& grad);
std::vector<const std::vector<double>*> grad_refs(const ReferralGrad& grad);

// Glorot-uniform weights, zero biases, deterministic in the seed.
void init_params(FunctionalNet& net, std::uint64_t seed);
void init_params(ReferralNet& net, std::uint64_t seed);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // decoupled, applied as lr * wd * param
};

class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  // params[i] and grads[i] must stay shape-stable across calls.
  void step(const std::vector<TensorRef>& params,
            const std::vector<const std::vector<double>*>& grads, double lr);
  long step_count() const { return step_; }

 private:
  AdamConfig cfg_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Checkpoint text format, one tensor per block; see docs/formats.md.
struct CheckpointMeta {
  std::size_t num_classes = 0;
  std::size_t num_views = 0;
  std::vector<std::size_t> view_dims;
  bool use_td = true;
  bool pseudo_view = false;
  bool normalized = true;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
};

struct Checkpoint {
  CheckpointMeta meta;
  std::vector<FunctionalNet> functional;
  std::vector<ReferralNet> referral;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tfmvc::nn
