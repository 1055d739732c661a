#include <algorithm>
#include <cmath>
#include <vector>

#include "gbwm/metarl/metarl.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

namespace {

double lerp_schedule(double start, double end, int epoch, int epochs) {
  if (epochs <= 1) return end;
  double f = static_cast<double>(epoch) / (epochs - 1);
  f = std::clamp(f, 0.0, 1.0);
  if (f >= 1.0) return end;  // land on the final value exactly
  return start + (end - start) * f;
}

}  // namespace

double PpoConfig::rho_at(int epoch) const {
  return lerp_schedule(rho_start, rho_end, epoch, epochs);
}

double PpoConfig::explore_std_at(int epoch) const {
  return lerp_schedule(explore_std_start, explore_std_end, epoch, epochs);
}

double squashed_gaussian_logprob(double logit, double mean, double stddev) {
  const double z = (logit - mean) / stddev;
  const double log_gauss =
      -0.5 * z * z - std::log(stddev) - 0.5 * std::log(2.0 * M_PI);
  // d sigmoid / d logit evaluated stably via |logit|.
  const double al = std::abs(logit);
  const double log_squash = -al - 2.0 * std::log1p(std::exp(-al));
  return log_gauss - log_squash;
}

PpoDiagnostics ppo_update(AgentNets& agent, const Batch& batch, const PpoConfig& cfg,
                          double explore_std, Rng& shuffle_rng) {
  PpoDiagnostics diag;
  const std::int64_t n = batch.size();
  if (n == 0) return diag;
  if (explore_std <= 0.0) throw InputError("ppo: exploration std must be positive");
  if (batch.states.cols() != n || batch.logp_old.size() != n || batch.returns.size() != n)
    throw InputError("ppo: inconsistent batch arrays");

  // Advantages against the pre-update critic, normalized over the buffer.
  const Eigen::RowVectorXd v0 = mlp_forward(agent.critic, batch.states);
  Eigen::VectorXd adv = batch.returns - v0.transpose();
  const double a_mean = adv.mean();
  adv.array() -= a_mean;
  const double a_std = std::sqrt(adv.squaredNorm() / static_cast<double>(n));
  if (a_std > 1e-12) adv /= a_std;

  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;

  const double var = explore_std * explore_std;
  int updates = 0;
  for (int pass = 0; pass < cfg.update_passes; ++pass) {
    for (std::int64_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::int64_t>(
          shuffle_rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    for (std::int64_t lo = 0; lo < n; lo += cfg.minibatch) {
      const std::int64_t m = std::min<std::int64_t>(cfg.minibatch, n - lo);
      Eigen::MatrixXd X(batch.states.rows(), m);
      Eigen::VectorXd logit(m), lp_old(m), ret(m), a(m);
      for (std::int64_t j = 0; j < m; ++j) {
        const std::int64_t k = idx[static_cast<std::size_t>(lo + j)];
        X.col(j) = batch.states.col(k);
        logit(j) = batch.logits(k);
        lp_old(j) = batch.logp_old(k);
        ret(j) = batch.returns(k);
        a(j) = adv(k);
      }

      // Policy: clipped surrogate on the squashed-Gaussian ratio. The squash
      // correction is identical in new and old log-probs, so it cancels out
      // of the ratio; the mean is the only moving part.
      ForwardCache fc;
      mlp_forward(agent.actor, X, &fc);
      const Eigen::RowVectorXd mean = fc.z_out;
      Eigen::RowVectorXd up(m);
      double loss = 0.0, ratio_sum = 0.0;
      int clipped = 0;
      for (std::int64_t j = 0; j < m; ++j) {
        const double lp_new = squashed_gaussian_logprob(logit(j), mean(j), explore_std);
        const double r = std::exp(lp_new - lp_old(j));
        const double rc = std::clamp(r, 1.0 - cfg.clip, 1.0 + cfg.clip);
        const double s1 = r * a(j);
        const double s2 = rc * a(j);
        loss -= std::min(s1, s2) / static_cast<double>(m);
        ratio_sum += r;
        if (r < 1.0 - cfg.clip || r > 1.0 + cfg.clip) ++clipped;
        const bool active = s1 <= s2;
        up(j) = active ? -a(j) * r * (logit(j) - mean(j)) / var / static_cast<double>(m)
                       : 0.0;
      }
      if (!std::isfinite(loss)) {
        diag.finite = false;
        return diag;
      }
      adam_step(agent.actor, agent.actor_opt, mlp_backward(agent.actor, fc, up),
                cfg.learning_rate);

      // Critic: squared-error regression to the returns-to-go.
      ForwardCache fcc;
      const Eigen::RowVectorXd v = mlp_forward(agent.critic, X, &fcc);
      const Eigen::RowVectorXd err = v - ret.transpose();
      const double vloss = err.squaredNorm() / static_cast<double>(m);
      if (!std::isfinite(vloss)) {
        diag.finite = false;
        return diag;
      }
      const Eigen::RowVectorXd vup = 2.0 * err / static_cast<double>(m);
      adam_step(agent.critic, agent.critic_opt, mlp_backward(agent.critic, fcc, vup),
                cfg.learning_rate);

      diag.policy_loss += loss;
      diag.value_loss += vloss;
      diag.mean_ratio += ratio_sum / static_cast<double>(m);
      diag.clip_fraction += static_cast<double>(clipped) / static_cast<double>(m);
      ++updates;
    }
  }
  if (updates > 0) {
    diag.policy_loss /= updates;
    diag.value_loss /= updates;
    diag.mean_ratio /= updates;
    diag.clip_fraction /= updates;
  }
  return diag;
}

namespace {

Eigen::RowVectorXd ensemble_median(const PolicyEnsemble& ens, const Eigen::MatrixXd& states,
                                   bool goal_agent) {
  if (ens.members.empty()) throw InputError("ensemble: no members");
  if (states.rows() != ens.input_dim)
    throw InputError("ensemble: state dimension mismatch");
  const std::size_t k = ens.members.size();
  Eigen::MatrixXd outs(static_cast<Eigen::Index>(k), states.cols());
  for (std::size_t i = 0; i < k; ++i) {
    const Mlp& actor = goal_agent ? ens.members[i].goal.actor
                                  : ens.members[i].portfolio.actor;
    outs.row(static_cast<Eigen::Index>(i)) = mlp_forward(actor, states);
  }
  Eigen::RowVectorXd med(states.cols());
  std::vector<double> col(k);
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    for (std::size_t i = 0; i < k; ++i) col[i] = outs(static_cast<Eigen::Index>(i), c);
    std::sort(col.begin(), col.end());
    med(c) = k % 2 == 1 ? col[k / 2] : 0.5 * (col[k / 2 - 1] + col[k / 2]);
  }
  return med;
}

}  // namespace

Eigen::RowVectorXd infer_goal_actions(const PolicyEnsemble& ens, const Eigen::MatrixXd& states) {
  return ensemble_median(ens, states, true);
}

Eigen::RowVectorXd infer_portfolio_actions(const PolicyEnsemble& ens,
                                           const Eigen::MatrixXd& states) {
  return ensemble_median(ens, states, false);
}

std::pair<double, double> infer_action(const PolicyEnsemble& ens, const StateVector& state) {
  const std::vector<double> flat = state.flat();
  if (static_cast<int>(flat.size()) != ens.input_dim)
    throw InputError("ensemble: state dimension mismatch");
  Eigen::MatrixXd x(ens.input_dim, 1);
  for (int i = 0; i < ens.input_dim; ++i) x(i, 0) = flat[static_cast<std::size_t>(i)];
  return {infer_goal_actions(ens, x)(0), infer_portfolio_actions(ens, x)(0)};
}

}  // namespace gbwm
