#include "tfmvc/neural.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace tfmvc::nn {

double apply_activation(Activation act, double z) {
  switch (act) {
    case Activation::Identity:
      return z;
    case Activation::Relu:
      return z > 0.0 ? z : 0.0;
    case Activation::Softplus:
      // log1p(exp(z)) overflows for large z; switch branch at 30.
      return z > 30.0 ? z : std::log1p(std::exp(z));
  }
  return z;
}

double activation_grad(Activation act, double z) {
  switch (act) {
    case Activation::Identity:
      return 1.0;
    case Activation::Relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::Softplus:
      return 1.0 / (1.0 + std::exp(-z));
  }
  return 1.0;
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation a)
    : in_dim(in), out_dim(out), act(a), w(in * out, 0.0), b(out, 0.0) {}

void DenseGrad::init(const DenseLayer& layer) {
  dw.assign(layer.w.size(), 0.0);
  db.assign(layer.b.size(), 0.0);
}

void DenseGrad::zero() {
  std::fill(dw.begin(), dw.end(), 0.0);
  std::fill(db.begin(), db.end(), 0.0);
}

std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& x,
                                  DenseTrace* trace) {
  if (x.size() != layer.in_dim) throw std::invalid_argument("dense_forward: input dim mismatch");
  std::vector<double> z = layer.b;
  for (std::size_t i = 0; i < layer.in_dim; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* wrow = layer.w.data() + i * layer.out_dim;
    for (std::size_t j = 0; j < layer.out_dim; ++j) z[j] += xi * wrow[j];
  }
  std::vector<double> y(layer.out_dim);
  for (std::size_t j = 0; j < layer.out_dim; ++j) y[j] = apply_activation(layer.act, z[j]);
  if (trace) {
    trace->input = x;
    trace->preact = std::move(z);
    trace->output = y;
  }
  return y;
}

std::vector<double> dense_backward(const DenseLayer& layer, const DenseTrace& trace,
                                   const std::vector<double>& dout, DenseGrad* grad) {
  if (trace.preact.size() != layer.out_dim || trace.input.size() != layer.in_dim) {
    throw std::logic_error("dense_backward: trace does not match a prior forward pass");
  }
  std::vector<double> dz(layer.out_dim);
  for (std::size_t j = 0; j < layer.out_dim; ++j) {
    dz[j] = dout[j] * activation_grad(layer.act, trace.preact[j]);
  }
  if (grad) {
    for (std::size_t j = 0; j < layer.out_dim; ++j) grad->db[j] += dz[j];
    for (std::size_t i = 0; i < layer.in_dim; ++i) {
      const double xi = trace.input[i];
      if (xi == 0.0) continue;
      double* grow = grad->dw.data() + i * layer.out_dim;
      for (std::size_t j = 0; j < layer.out_dim; ++j) grow[j] += xi * dz[j];
    }
  }
  std::vector<double> dx(layer.in_dim, 0.0);
  for (std::size_t i = 0; i < layer.in_dim; ++i) {
    const double* wrow = layer.w.data() + i * layer.out_dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < layer.out_dim; ++j) acc += wrow[j] * dz[j];
    dx[i] = acc;
  }
  return dx;
}

BilinearLayer::BilinearLayer(std::size_t left, std::size_t right, std::size_t out, Activation a)
    : left_dim(left), right_dim(right), out_dim(out), act(a), w(left * right * out, 0.0),
      b(out, 0.0) {}

void BilinearGrad::init(const BilinearLayer& layer) {
  dw.assign(layer.w.size(), 0.0);
  db.assign(layer.b.size(), 0.0);
}

void BilinearGrad::zero() {
  std::fill(dw.begin(), dw.end(), 0.0);
  std::fill(db.begin(), db.end(), 0.0);
}

std::vector<double> bilinear_forward(const BilinearLayer& layer, const std::vector<double>& left,
                                     const std::vector<double>& right, BilinearTrace* trace) {
  if (left.size() != layer.left_dim || right.size() != layer.right_dim) {
    throw std::invalid_argument("bilinear_forward: input dim mismatch");
  }
  std::vector<double> z = layer.b;
  for (std::size_t i = 0; i < layer.left_dim; ++i) {
    const double li = left[i];
    if (li == 0.0) continue;
    for (std::size_t r = 0; r < layer.right_dim; ++r) {
      const double lr = li * right[r];
      if (lr == 0.0) continue;
      const double* wrow = layer.w.data() + (i * layer.right_dim + r) * layer.out_dim;
      for (std::size_t j = 0; j < layer.out_dim; ++j) z[j] += lr * wrow[j];
    }
  }
  std::vector<double> y(layer.out_dim);
  for (std::size_t j = 0; j < layer.out_dim; ++j) y[j] = apply_activation(layer.act, z[j]);
  if (trace) {
    trace->left = left;
    trace->right = right;
    trace->preact = std::move(z);
    trace->output = y;
  }
  return y;
}

BilinearInputGrad bilinear_backward(const BilinearLayer& layer, const BilinearTrace& trace,
                                    const std::vector<double>& dout, BilinearGrad* grad) {
  if (trace.preact.size() != layer.out_dim) {
    throw std::logic_error("bilinear_backward: trace does not match a prior forward pass");
  }
  std::vector<double> dz(layer.out_dim);
  for (std::size_t j = 0; j < layer.out_dim; ++j) {
    dz[j] = dout[j] * activation_grad(layer.act, trace.preact[j]);
  }
  BilinearInputGrad in;
  in.dleft.assign(layer.left_dim, 0.0);
  in.dright.assign(layer.right_dim, 0.0);
  if (grad) {
    for (std::size_t j = 0; j < layer.out_dim; ++j) grad->db[j] += dz[j];
  }
  for (std::size_t i = 0; i < layer.left_dim; ++i) {
    const double li = trace.left[i];
    for (std::size_t r = 0; r < layer.right_dim; ++r) {
      const std::size_t base = (i * layer.right_dim + r) * layer.out_dim;
      const double* wrow = layer.w.data() + base;
      double wdz = 0.0;
      for (std::size_t j = 0; j < layer.out_dim; ++j) wdz += wrow[j] * dz[j];
      in.dleft[i] += wdz * trace.right[r];
      in.dright[r] += wdz * li;
      if (grad) {
        const double prod = li * trace.right[r];
        if (prod != 0.0) {
          double* grow = grad->dw.data() + base;
          for (std::size_t j = 0; j < layer.out_dim; ++j) grow[j] += prod * dz[j];
        }
      }
    }
  }
  return in;
}

FunctionalNet::FunctionalNet(std::size_t input_dim, std::size_t hidden_dim,
                             std::size_t num_classes)
    : hidden(input_dim, hidden_dim, Activation::Relu),
      head(hidden_dim, num_classes, Activation::Softplus) {}

void FunctionalGrad::init(const FunctionalNet& net) {
  hidden.init(net.hidden);
  head.init(net.head);
}

void FunctionalGrad::zero() {
  hidden.zero();
  head.zero();
}

std::vector<double> functional_forward(const FunctionalNet& net, const std::vector<double>& x,
                                       FunctionalTrace* trace) {
  std::vector<double> h = dense_forward(net.hidden, x, trace ? &trace->hidden : nullptr);
  return dense_forward(net.head, h, trace ? &trace->head : nullptr);
}

std::vector<double> functional_backward(const FunctionalNet& net, const FunctionalTrace& trace,
                                        const std::vector<double>& devidence,
                                        FunctionalGrad* grad) {
  std::vector<double> dh = dense_backward(net.head, trace.head, devidence,
                                          grad ? &grad->head : nullptr);
  return dense_backward(net.hidden, trace.hidden, dh, grad ? &grad->hidden : nullptr);
}

ReferralNet::ReferralNet(std::size_t input_dim, std::size_t num_classes, std::size_t encoder_dim,
                         std::size_t mix_dim)
    : encoder(input_dim, encoder_dim, Activation::Relu),
      mix(encoder_dim, num_classes + 1, mix_dim, Activation::Relu),
      head(mix_dim, 2, Activation::Softplus) {}

void ReferralGrad::init(const ReferralNet& net) {
  encoder.init(net.encoder);
  mix.init(net.mix);
  head.init(net.head);
}

void ReferralGrad::zero() {
  encoder.zero();
  mix.zero();
  head.zero();
}

std::vector<double> referral_forward(const ReferralNet& net, const std::vector<double>& x,
                                     const std::vector<double>& opinion, ReferralTrace* trace) {
  std::vector<double> h = dense_forward(net.encoder, x, trace ? &trace->encoder : nullptr);
  std::vector<double> m = bilinear_forward(net.mix, h, opinion, trace ? &trace->mix : nullptr);
  return dense_forward(net.head, m, trace ? &trace->head : nullptr);
}

std::vector<double> referral_backward(const ReferralNet& net, const ReferralTrace& trace,
                                      const std::vector<double>& devidence, ReferralGrad* grad) {
  std::vector<double> dm = dense_backward(net.head, trace.head, devidence,
                                          grad ? &grad->head : nullptr);
  BilinearInputGrad din = bilinear_backward(net.mix, trace.mix, dm, grad ? &grad->mix : nullptr);
  dense_backward(net.encoder, trace.encoder, din.dleft, grad ? &grad->encoder : nullptr);
  return std::move(din.dright);
}

std::vector<TensorRef> param_refs(FunctionalNet& net, const std::string& prefix) {
  return {
      {prefix + ".hidden.w", {net.hidden.in_dim, net.hidden.out_dim}, &net.hidden.w},
      {prefix + ".hidden.b", {net.hidden.out_dim}, &net.hidden.b},
      {prefix + ".head.w", {net.head.in_dim, net.head.out_dim}, &net.head.w},
      {prefix + ".head.b", {net.head.out_dim}, &net.head.b},
  };
}

std::vector<TensorRef> param_refs(ReferralNet& net, const std::string& prefix) {
  return {
      {prefix + ".encoder.w", {net.encoder.in_dim, net.encoder.out_dim}, &net.encoder.w},
      {prefix + ".encoder.b", {net.encoder.out_dim}, &net.encoder.b},
      {prefix + ".mix.w", {net.mix.left_dim, net.mix.right_dim, net.mix.out_dim}, &net.mix.w},
      {prefix + ".mix.b", {net.mix.out_dim}, &net.mix.b},
      {prefix + ".head.w", {net.head.in_dim, net.head.out_dim}, &net.head.w},
      {prefix + ".head.b", {net.head.out_dim}, &net.head.b},
  };
}

std::vector<const std::vector<double>*> grad_refs(const FunctionalGrad& grad) {
  return {&grad.hidden.dw, &grad.hidden.db, &grad.head.dw, &grad.head.db};
}

std::vector<const std::vector<double>*> grad_refs(const ReferralGrad& grad) {
  return {&grad.encoder.dw, &grad.encoder.db, &grad.mix.dw,
          &grad.mix.db,     &grad.head.dw,    &grad.head.db};
}

namespace {

void glorot_fill(std::vector<double>& w, std::size_t fan_in, std::size_t fan_out,
                 std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& x : w) x = dist(rng);
}

}  // namespace

void init_params(FunctionalNet& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  glorot_fill(net.hidden.w, net.hidden.in_dim, net.hidden.out_dim, rng);
  std::fill(net.hidden.b.begin(), net.hidden.b.end(), 0.0);
  glorot_fill(net.head.w, net.head.in_dim, net.head.out_dim, rng);
  std::fill(net.head.b.begin(), net.head.b.end(), 0.0);
}

void init_params(ReferralNet& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  glorot_fill(net.encoder.w, net.encoder.in_dim, net.encoder.out_dim, rng);
  std::fill(net.encoder.b.begin(), net.encoder.b.end(), 0.0);
  glorot_fill(net.mix.w, net.mix.left_dim * net.mix.right_dim, net.mix.out_dim, rng);
  std::fill(net.mix.b.begin(), net.mix.b.end(), 0.0);
  glorot_fill(net.head.w, net.head.in_dim, net.head.out_dim, rng);
  std::fill(net.head.b.begin(), net.head.b.end(), 0.0);
}

void AdamState::step(const std::vector<TensorRef>& params,
                     const std::vector<const std::vector<double>*>& grads, double lr) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam: tensor count mismatch");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t t = 0; t < params.size(); ++t) {
      m_[t].assign(params[t].data->size(), 0.0);
      v_[t].assign(params[t].data->size(), 0.0);
    }
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t t = 0; t < params.size(); ++t) {
    std::vector<double>& p = *params[t].data;
    const std::vector<double>& g = *grads[t];
    if (p.size() != g.size() || p.size() != m_[t].size()) {
      throw std::invalid_argument("adam: shape mismatch for " + params[t].name);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m_[t][i] = cfg_.beta1 * m_[t][i] + (1.0 - cfg_.beta1) * g[i];
      v_[t][i] = cfg_.beta2 * v_[t][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m_[t][i] / bc1;
      const double vhat = v_[t][i] / bc2;
      p[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.epsilon) + cfg_.weight_decay * p[i]);
    }
  }
}

namespace {

void write_tensor(std::ostream& os, const TensorRef& ref) {
  os << "tensor " << ref.name << " " << ref.shape.size();
  for (std::size_t d : ref.shape) os << " " << d;
  os << "\n";
  char buf[32];
  const std::vector<double>& data = *ref.data;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", data[i]);
    os << buf << (i + 1 == data.size() ? "" : " ");
  }
  os << "\n";
}

void read_tensor(std::istream& is, std::vector<TensorRef>& expected, std::size_t index) {
  std::string tag, name;
  std::size_t ndims = 0;
  if (!(is >> tag >> name >> ndims) || tag != "tensor") {
    throw std::runtime_error("checkpoint: malformed tensor header");
  }
  if (index >= expected.size() || name != expected[index].name) {
    throw std::runtime_error("checkpoint: unexpected tensor " + name);
  }
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    std::size_t dim = 0;
    if (!(is >> dim)) throw std::runtime_error("checkpoint: bad shape for " + name);
    count *= dim;
  }
  std::vector<double>& data = *expected[index].data;
  if (count != data.size()) throw std::runtime_error("checkpoint: shape mismatch for " + name);
  for (double& x : data) {
    if (!(is >> x)) throw std::runtime_error("checkpoint: truncated values for " + name);
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os << "tfmvc-checkpoint v1\n";
  os << "classes " << ckpt.meta.num_classes << "\n";
  os << "views " << ckpt.meta.num_views << "\n";
  os << "view_dims";
  for (std::size_t d : ckpt.meta.view_dims) os << " " << d;
  os << "\n";
  os << "use_td " << (ckpt.meta.use_td ? 1 : 0) << "\n";
  os << "pseudo_view " << (ckpt.meta.pseudo_view ? 1 : 0) << "\n";
  os << "normalized " << (ckpt.meta.normalized ? 1 : 0) << "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", ckpt.meta.train_fraction);
  os << "train_fraction " << buf << "\n";
  os << "seed " << ckpt.meta.seed << "\n";
  os << "dataset_fingerprint "
     << (ckpt.meta.dataset_fingerprint.empty() ? "none" : ckpt.meta.dataset_fingerprint) << "\n";
  os << "hidden_dims";
  for (const auto& f : ckpt.functional) os << " " << f.hidden.out_dim;
  os << "\n";
  if (!ckpt.referral.empty()) {
    os << "referral_dims " << ckpt.referral[0].encoder.out_dim << " "
       << ckpt.referral[0].mix.out_dim << "\n";
  } else {
    os << "referral_dims 0 0\n";
  }
  for (std::size_t v = 0; v < ckpt.functional.size(); ++v) {
    auto refs = param_refs(const_cast<FunctionalNet&>(ckpt.functional[v]),
                           "functional." + std::to_string(v));
    for (const auto& r : refs) write_tensor(os, r);
  }
  for (std::size_t v = 0; v < ckpt.referral.size(); ++v) {
    auto refs = param_refs(const_cast<ReferralNet&>(ckpt.referral[v]),
                           "referral." + std::to_string(v));
    for (const auto& r : refs) write_tensor(os, r);
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  std::getline(is, line);
  if (line != "tfmvc-checkpoint v1") {
    throw std::runtime_error("checkpoint: unsupported header '" + line + "'");
  }
  Checkpoint ckpt;
  std::string key;
  is >> key >> ckpt.meta.num_classes;
  if (key != "classes") throw std::runtime_error("checkpoint: expected classes");
  is >> key >> ckpt.meta.num_views;
  if (key != "views") throw std::runtime_error("checkpoint: expected views");
  is >> key;
  if (key != "view_dims") throw std::runtime_error("checkpoint: expected view_dims");
  ckpt.meta.view_dims.resize(ckpt.meta.num_views);
  for (auto& d : ckpt.meta.view_dims) is >> d;
  int flag = 0;
  is >> key >> flag;
  ckpt.meta.use_td = flag != 0;
  is >> key >> flag;
  ckpt.meta.pseudo_view = flag != 0;
  is >> key >> flag;
  ckpt.meta.normalized = flag != 0;
  is >> key >> ckpt.meta.train_fraction;
  is >> key >> ckpt.meta.seed;
  is >> key >> ckpt.meta.dataset_fingerprint;
  if (ckpt.meta.dataset_fingerprint == "none") ckpt.meta.dataset_fingerprint.clear();
  is >> key;
  if (key != "hidden_dims") throw std::runtime_error("checkpoint: expected hidden_dims");
  std::vector<std::size_t> hidden_dims(ckpt.meta.num_views);
  for (auto& d : hidden_dims) is >> d;
  std::size_t enc_dim = 0, mix_dim = 0;
  is >> key >> enc_dim >> mix_dim;
  if (key != "referral_dims") throw std::runtime_error("checkpoint: expected referral_dims");
  if (!is) throw std::runtime_error("checkpoint: truncated metadata");

  std::vector<TensorRef> expected;
  for (std::size_t v = 0; v < ckpt.meta.num_views; ++v) {
    ckpt.functional.emplace_back(ckpt.meta.view_dims[v], hidden_dims[v], ckpt.meta.num_classes);
  }
  if (ckpt.meta.use_td) {
    for (std::size_t v = 0; v < ckpt.meta.num_views; ++v) {
      ckpt.referral.emplace_back(ckpt.meta.view_dims[v], ckpt.meta.num_classes, enc_dim, mix_dim);
    }
  }
  for (std::size_t v = 0; v < ckpt.functional.size(); ++v) {
    auto refs = param_refs(ckpt.functional[v], "functional." + std::to_string(v));
    expected.insert(expected.end(), refs.begin(), refs.end());
  }
  for (std::size_t v = 0; v < ckpt.referral.size(); ++v) {
    auto refs = param_refs(ckpt.referral[v], "referral." + std::to_string(v));
    expected.insert(expected.end(), refs.begin(), refs.end());
  }
  for (std::size_t i = 0; i < expected.size(); ++i) read_tensor(is, expected, i);
  return ckpt;
}

}  // namespace tfmvc::nn
