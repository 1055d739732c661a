#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "gbwm/dp/dp.hpp"
#include "gbwm/env/environment.hpp"
#include "gbwm/metarl/metarl.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

namespace {

// ShockStream view over a ShockSource so an episode's market/rate shocks and
// the policy's exploration noise come from one keyed source.
class SourceStream final : public ShockStream {
 public:
  explicit SourceStream(ShockSource& src) : src_(&src) {}
  double gbm() override { return src_->gbm(); }
  double inflation() override { return src_->inflation(); }

 private:
  ShockSource* src_;
};

Eigen::MatrixXd column_from(const std::vector<double>& flat) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(flat.size()), 1);
  for (std::size_t i = 0; i < flat.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = flat[i];
  return x;
}

// Deterministic policy: actor means through the sigmoid head, no noise.
class GreedyPolicy final : public Policy {
 public:
  GreedyPolicy(const AgentNets& goal, const AgentNets& port) : goal_(&goal), port_(&port) {}
  double goal_action(const StateVector& s) override {
    return mlp_forward(goal_->actor, column_from(s.flat()))(0);
  }
  double portfolio_action(const StateVector& s) override {
    return mlp_forward(port_->actor, column_from(s.flat()))(0);
  }

 private:
  const AgentNets* goal_;
  const AgentNets* port_;
};

// Rollout policy: Gaussian noise on the pre-sigmoid mean, recording the
// sampled logit and its log-density in call order (time order within the
// episode, goals before portfolios at a shared step).
class ExplorePolicy final : public Policy {
 public:
  struct Rec {
    double logit = 0.0;
    double logp = 0.0;
  };

  ExplorePolicy(const AgentNets& goal, const AgentNets& port, double stddev)
      : goal_(&goal), port_(&port), std_(stddev) {}

  void start_episode(ShockSource& src) {
    src_ = &src;
    goal_recs.clear();
    port_recs.clear();
  }

  double goal_action(const StateVector& s) override { return act(goal_->actor, s, goal_recs); }
  double portfolio_action(const StateVector& s) override { return act(port_->actor, s, port_recs); }

  std::vector<Rec> goal_recs, port_recs;

 private:
  double act(const Mlp& actor, const StateVector& s, std::vector<Rec>& out) {
    ForwardCache fc;
    mlp_forward(actor, column_from(s.flat()), &fc);
    const double mean = fc.z_out(0);
    const double logit = mean + std_ * src_->exploration();
    out.push_back({logit, squashed_gaussian_logprob(logit, mean, std_)});
    return logistic(logit);
  }

  const AgentNets* goal_;
  const AgentNets* port_;
  double std_;
  ShockSource* src_ = nullptr;
};

// Column-major accumulator for an epoch's transition buffer.
struct BufferBuilder {
  int dim = 0;
  std::vector<double> states;  // dim doubles per sample
  std::vector<double> logits, logps, returns;

  void add(const std::vector<double>& flat, double logit, double logp, double ret) {
    states.insert(states.end(), flat.begin(), flat.end());
    logits.push_back(logit);
    logps.push_back(logp);
    returns.push_back(ret);
  }

  Batch build() const {
    Batch b;
    const auto n = static_cast<Eigen::Index>(logits.size());
    b.states = Eigen::Map<const Eigen::MatrixXd>(states.data(), dim, n);
    b.logits = Eigen::Map<const Eigen::VectorXd>(logits.data(), n);
    b.logp_old = Eigen::Map<const Eigen::VectorXd>(logps.data(), n);
    b.returns = Eigen::Map<const Eigen::VectorXd>(returns.data(), n);
    return b;
  }
};

bool mlp_finite(const Mlp& net) {
  for (const auto& w : net.W)
    if (!w.allFinite()) return false;
  for (const auto& b : net.b)
    if (!b.allFinite()) return false;
  return true;
}

bool member_finite(const EnsembleMember& m) {
  return mlp_finite(m.goal.actor) && mlp_finite(m.goal.critic) &&
         mlp_finite(m.portfolio.actor) && mlp_finite(m.portfolio.critic);
}

// Intrinsic-only returns for the zero-extrinsic diagnostic mode.
std::pair<std::vector<double>, std::vector<double>> intrinsic_returns(const EpisodeTrace& tr) {
  const std::size_t n = tr.steps.size();
  std::vector<double> rg(n, 0.0), rp(n, 0.0);
  double ag = 0.0, ap = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    ag += tr.steps[i].r_i_g.value_or(0.0);
    ap += tr.steps[i].r_i_p;
    rg[i] = ag;
    rp[i] = ap;
  }
  return {rg, rp};
}

// Reference value for the monitoring curve: grid-DP optimum of the epoch's
// scenario (inflation stripped; the grid solver does not model it).
double curve_reference(const Scenario& sc, int nodes) {
  Scenario plain = sc;
  plain.inflation.reset();
  const WealthGrid grid = build_wealth_grid(plain, nodes);
  const DPSolution sol = backward_pass(plain, grid);
  return bellman_value_at(sol, plain, 0, plain.W0);
}

double greedy_mean_utility(const FeatureContext& ctx, const AgentNets& goal,
                           const AgentNets& port, std::uint64_t panel_seed, int paths,
                           double thresh) {
  GreedyPolicy pol(goal, port);
  double sum = 0.0;
  for (int i = 0; i < paths; ++i) {
    SeededShocks shocks(panel_seed, static_cast<std::uint64_t>(i));
    sum += run_episode(ctx, pol, shocks, 0.0, thresh).total_utility;
  }
  return sum / paths;
}

AgentNets init_agent_pair(std::uint64_t seed, int input_dim, int which) {
  Rng rng(derive_seed(seed, "init", static_cast<std::uint64_t>(which)));
  return init_agent(input_dim, rng);
}

}  // namespace

TrainResult train(const TrainSetup& setup, const PolicyEnsemble* resume_from) {
  if (setup.portfolios.size() < 1) throw InputError("train: need a portfolio set");
  if (setup.curve_paths < 1 || setup.curve_nodes < 2)
    throw InputError("train: curve settings out of range");

  TrainResult res;
  PolicyEnsemble& ens = res.ensemble;

  if (resume_from) {
    ens = *resume_from;
    if (ens.members.empty()) throw InputError("train: resume checkpoint has no members");
    if (ens.inflation_aware() != setup.inflation)
      throw InputError("train: resume checkpoint disagrees about inflation awareness");
    if (ens.epochs_done >= ens.config.epochs) return res;  // already finished
  } else {
    const PpoConfig& cfg = setup.ppo;
    if (cfg.seeds < 1 || cfg.epochs < 1 || cfg.episodes_per_epoch < 1)
      throw InputError("train: seeds, epochs and episodes must be positive");
    if (cfg.minibatch < 1 || cfg.update_passes < 1)
      throw InputError("train: minibatch and passes must be positive");
    if (cfg.explore_std_start <= 0.0 || cfg.explore_std_end <= 0.0)
      throw InputError("train: exploration std must stay positive");
    if (!setup.member_seeds.empty() &&
        static_cast<int>(setup.member_seeds.size()) != cfg.seeds)
      throw InputError("train: member seed list length must match the seed count");

    ens.input_dim = setup.inflation ? kStateDim + 1 : kStateDim;
    ens.config = cfg;
    ens.scenario_seed = setup.scenario_seed;
    ens.epochs_done = 0;
    for (int i = 0; i < cfg.seeds; ++i) {
      EnsembleMember m;
      m.seed = setup.member_seeds.empty() ? static_cast<std::uint64_t>(i + 1)
                                          : setup.member_seeds[static_cast<std::size_t>(i)];
      m.goal = init_agent_pair(m.seed, ens.input_dim, 0);
      m.portfolio = init_agent_pair(m.seed, ens.input_dim, 1);
      ens.members.push_back(std::move(m));
    }
  }

  const PpoConfig& cfg = ens.config;
  const CurriculumConfig curriculum{setup.portfolios, setup.inflation};

  res.curves.columns.push_back("epoch");
  for (const auto& m : ens.members)
    res.curves.columns.push_back("seed_" + std::to_string(m.seed));
  res.curves.columns.push_back("mean");
  res.curves.columns.push_back("std");

  const int end_epoch = setup.stop_after_epochs > 0
                            ? std::min(cfg.epochs, setup.stop_after_epochs)
                            : cfg.epochs;
  for (int e = ens.epochs_done; e < end_epoch; ++e) {
    Rng scen_rng(derive_seed(ens.scenario_seed, "scenario", static_cast<std::uint64_t>(e)));
    const Scenario sc = generate_scenario(scen_rng, curriculum);
    const FeatureContext ctx(sc);
    const double rho = cfg.rho_at(e);
    const double std_e = cfg.explore_std_at(e);

    const std::vector<EnsembleMember> snapshot = ens.members;

    std::string abort;
    for (auto& m : ens.members) {
      BufferBuilder goal_buf, port_buf;
      goal_buf.dim = ens.input_dim;
      port_buf.dim = ens.input_dim;
      ExplorePolicy pol(m.goal, m.portfolio, std_e);
      Rng jitter_rng(derive_seed(m.seed, "jitter", static_cast<std::uint64_t>(e)));
      const std::uint64_t shock_seed = derive_seed(m.seed, "shocks", static_cast<std::uint64_t>(e));

      for (int ep = 0; ep < cfg.episodes_per_epoch; ++ep) {
        ShockSource src(shock_seed, static_cast<std::uint64_t>(ep));
        SourceStream stream(src);
        pol.start_episode(src);
        const double w0 = sc.W0 * jitter_rng.uniform(cfg.jitter_lo, cfg.jitter_hi);
        const EpisodeTrace tr = run_episode(ctx, pol, stream, rho, cfg.a_thresh, w0);

        std::vector<double> rg_store, rp_store;
        if (cfg.zero_extrinsic) std::tie(rg_store, rp_store) = intrinsic_returns(tr);
        const std::vector<double>& rg = cfg.zero_extrinsic ? rg_store : tr.R_g;
        const std::vector<double>& rp = cfg.zero_extrinsic ? rp_store : tr.R_p;

        std::size_t gi = 0, pi = 0;
        for (std::size_t t = 0; t < tr.steps.size(); ++t) {
          const StepRecord& st = tr.steps[t];
          if (!st.obs_goal.empty()) {
            goal_buf.add(st.obs_goal, pol.goal_recs[gi].logit, pol.goal_recs[gi].logp, rg[t]);
            ++gi;
          }
          if (!st.obs_port.empty()) {
            port_buf.add(st.obs_port, pol.port_recs[pi].logit, pol.port_recs[pi].logp, rp[t]);
            ++pi;
          }
        }
        if (gi != pol.goal_recs.size() || pi != pol.port_recs.size())
          throw NumericError("train: rollout records out of step with the trace");
      }

      Rng shuffle_g(derive_seed(m.seed, "shuffle", static_cast<std::uint64_t>(e), 0));
      Rng shuffle_p(derive_seed(m.seed, "shuffle", static_cast<std::uint64_t>(e), 1));
      const PpoDiagnostics dg = ppo_update(m.goal, goal_buf.build(), cfg, std_e, shuffle_g);
      const PpoDiagnostics dp = ppo_update(m.portfolio, port_buf.build(), cfg, std_e, shuffle_p);
      if (!dg.finite || !dp.finite || !member_finite(m)) {
        abort = "non-finite update at epoch " + std::to_string(e + 1) + ", seed " +
                std::to_string(m.seed);
        break;
      }
    }

    if (!abort.empty()) {
      ens.members = snapshot;  // last epoch that finished cleanly
      ens.epochs_done = e;
      res.abort_reason = abort;
      return res;
    }

    // Monitoring curve: each member's deterministic efficiency on this epoch's
    // scenario against the grid-DP optimum, shared shock panel across members.
    const double ref = curve_reference(sc, setup.curve_nodes);
    const std::uint64_t panel_seed =
        derive_seed(ens.scenario_seed, "curve", static_cast<std::uint64_t>(e));
    std::vector<std::optional<double>> row;
    row.emplace_back(static_cast<double>(e + 1));
    double sum = 0.0, sum2 = 0.0;
    for (const auto& m : ens.members) {
      const double u = greedy_mean_utility(ctx, m.goal, m.portfolio, panel_seed,
                                           setup.curve_paths, cfg.a_thresh);
      const double eff = ref > 0.0 ? u / ref : 0.0;
      row.emplace_back(eff);
      sum += eff;
      sum2 += eff * eff;
    }
    const double n = static_cast<double>(ens.members.size());
    const double mean = sum / n;
    row.emplace_back(mean);
    row.emplace_back(std::sqrt(std::max(0.0, sum2 / n - mean * mean)));
    res.curves.rows.push_back(std::move(row));

    ens.epochs_done = e + 1;
  }
  return res;
}

}  // namespace gbwm
