#include <cmath>

#include "gbwm/metarl/metarl.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

MlpSpec actor_spec(int input_dim) { return {{input_dim, 256, 64, 16, 1}, true}; }

MlpSpec critic_spec(int input_dim) { return {{input_dim, 64, 16, 1}, false}; }

std::int64_t Mlp::parameter_count() const {
  std::int64_t n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
  return n;
}

Mlp init_mlp(const MlpSpec& spec, Rng& rng) {
  if (spec.widths.size() < 2) throw InputError("mlp: spec needs at least two widths");
  for (int w : spec.widths)
    if (w < 1) throw InputError("mlp: layer widths must be positive");
  Mlp net;
  net.spec = spec;
  for (int l = 0; l < spec.layers(); ++l) {
    const int in = spec.widths[static_cast<std::size_t>(l)];
    const int out = spec.widths[static_cast<std::size_t>(l) + 1];
    const double lim = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd w(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) w(i, j) = rng.uniform(-lim, lim);
    net.W.push_back(std::move(w));
    net.b.push_back(Eigen::VectorXd::Zero(out));
  }
  return net;
}

Eigen::RowVectorXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& X,
                               ForwardCache* cache) {
  if (X.rows() != net.spec.input())
    throw InputError("mlp: input dimension mismatch");
  if (cache != nullptr) {
    cache->act.clear();
    cache->act.push_back(X);
  }
  Eigen::MatrixXd a = X;
  const int L = net.spec.layers();
  for (int l = 0; l < L - 1; ++l) {
    a = ((net.W[static_cast<std::size_t>(l)] * a).colwise() +
         net.b[static_cast<std::size_t>(l)])
            .array()
            .tanh()
            .matrix();
    if (cache != nullptr) cache->act.push_back(a);
  }
  Eigen::RowVectorXd z =
      ((net.W[static_cast<std::size_t>(L) - 1] * a).colwise() +
       net.b[static_cast<std::size_t>(L) - 1])
          .row(0);
  if (cache != nullptr) cache->z_out = z;
  if (!net.spec.sigmoid_head) return z;
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

MlpGrads mlp_backward(const Mlp& net, const ForwardCache& cache,
                      const Eigen::RowVectorXd& upstream) {
  const int L = net.spec.layers();
  if (static_cast<int>(cache.act.size()) != L)
    throw InputError("mlp: forward cache does not match the network");
  MlpGrads g;
  g.dW.resize(static_cast<std::size_t>(L));
  g.db.resize(static_cast<std::size_t>(L));

  // Output layer: delta is the upstream itself (gradients are w.r.t. z_out).
  Eigen::MatrixXd delta = upstream;
  for (int l = L - 1; l >= 0; --l) {
    const Eigen::MatrixXd& below = cache.act[static_cast<std::size_t>(l)];
    g.dW[static_cast<std::size_t>(l)] = delta * below.transpose();
    g.db[static_cast<std::size_t>(l)] = delta.rowwise().sum();
    if (l > 0) {
      // Pull through the tanh of the layer below.
      delta = (net.W[static_cast<std::size_t>(l)].transpose() * delta)
                  .cwiseProduct((1.0 - below.array().square()).matrix());
    }
  }
  return g;
}

AdamState make_adam(const Mlp& net) {
  AdamState s;
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    s.mW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    s.vW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    s.mb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    s.vb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
  }
  return s;
}

void adam_step(Mlp& net, AdamState& opt, const MlpGrads& g, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  opt.step += 1;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(opt.step));
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    opt.mW[l] = kBeta1 * opt.mW[l] + (1.0 - kBeta1) * g.dW[l];
    opt.vW[l] = kBeta2 * opt.vW[l].array().matrix() +
                (1.0 - kBeta2) * g.dW[l].array().square().matrix();
    net.W[l].array() -= lr * (opt.mW[l].array() / c1) /
                        ((opt.vW[l].array() / c2).sqrt() + kEps);
    opt.mb[l] = kBeta1 * opt.mb[l] + (1.0 - kBeta1) * g.db[l];
    opt.vb[l] = kBeta2 * opt.vb[l].array().matrix() +
                (1.0 - kBeta2) * g.db[l].array().square().matrix();
    net.b[l].array() -= lr * (opt.mb[l].array() / c1) /
                        ((opt.vb[l].array() / c2).sqrt() + kEps);
  }
}

AgentNets init_agent(int input_dim, Rng& rng) {
  AgentNets a;
  a.actor = init_mlp(actor_spec(input_dim), rng);
  a.critic = init_mlp(critic_spec(input_dim), rng);
  a.actor_opt = make_adam(a.actor);
  a.critic_opt = make_adam(a.critic);
  return a;
}

}  // namespace gbwm
