#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gbwm/core/types.hpp"
#include "gbwm/features/features.hpp"
#include "gbwm/util/rng.hpp"
#include "gbwm/util/text_table.hpp"

namespace gbwm {

// ---- networks ----

struct MlpSpec {
  std::vector<int> widths;  // input, hidden..., output (always 1 here)
  bool sigmoid_head = false;

  int input() const { return widths.front(); }
  int layers() const { return static_cast<int>(widths.size()) - 1; }
};

// Actor: input -> 256 -> 64 -> 16 -> 1, tanh hidden, sigmoid head.
MlpSpec actor_spec(int input_dim);
// Critic: input -> 64 -> 16 -> 1, tanh hidden, linear head.
MlpSpec critic_spec(int input_dim);

struct Mlp {
  MlpSpec spec;
  std::vector<Eigen::MatrixXd> W;  // W[l]: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> b;

  std::int64_t parameter_count() const;
};

// Scaled-uniform init (symmetric fan-based bounds), deterministic in rng.
Mlp init_mlp(const MlpSpec& spec, Rng& rng);

struct ForwardCache {
  std::vector<Eigen::MatrixXd> act;  // act[0] = X, act[l] = tanh layer outputs
  Eigen::RowVectorXd z_out;          // pre-head outputs, one per column
};

// Batched forward pass, one sample per column of X. Output row has the head
// applied (sigmoid for actors, identity for critics).
Eigen::RowVectorXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& X,
                               ForwardCache* cache = nullptr);

struct MlpGrads {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

// Backpropagation from d(objective)/d(z_out) (pre-head, one entry per batch
// column); sums over the batch, so scale the upstream for means.
MlpGrads mlp_backward(const Mlp& net, const ForwardCache& cache,
                      const Eigen::RowVectorXd& upstream);

struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  std::int64_t step = 0;
};

AdamState make_adam(const Mlp& net);
void adam_step(Mlp& net, AdamState& opt, const MlpGrads& g, double lr);

// ---- PPO ----

struct PpoConfig {
  double learning_rate = 1e-4;
  double clip = 0.2;
  double discount = 1.0;  // returns-to-go are plain sums (discount 1)
  int epochs = 1000;
  int episodes_per_epoch = 500;
  double rho_start = 1.0;
  double rho_end = 0.25;
  double a_thresh = 0.5;
  int seeds = 5;
  double jitter_lo = 0.8;  // initial-wealth jitter band
  double jitter_hi = 1.2;
  // Exploration noise is a Gaussian in pre-sigmoid (logit) space with a
  // state-independent std on a linear schedule. Not a published quantity;
  // tune here.
  double explore_std_start = 0.3;
  double explore_std_end = 0.05;
  int minibatch = 4096;
  int update_passes = 4;
  bool zero_extrinsic = false;  // diagnostic: isolates the intrinsic term

  double rho_at(int epoch) const;
  double explore_std_at(int epoch) const;
};

// One agent's epoch buffer; states are columns.
struct Batch {
  Eigen::MatrixXd states;
  Eigen::VectorXd logits;   // sampled pre-squash actions
  Eigen::VectorXd logp_old;
  Eigen::VectorXd returns;

  std::int64_t size() const { return logits.size(); }
};

struct AgentNets {
  Mlp actor;
  Mlp critic;
  AdamState actor_opt;
  AdamState critic_opt;
};

AgentNets init_agent(int input_dim, Rng& rng);

struct PpoDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  bool finite = true;
};

// Clipped-surrogate PPO update plus critic regression: `passes` sweeps over
// the buffer in shuffled minibatches. Advantages (returns minus critic
// values) are normalized over the whole buffer.
PpoDiagnostics ppo_update(AgentNets& agent, const Batch& batch, const PpoConfig& cfg,
                          double explore_std, Rng& shuffle_rng);

// log-density of the squashed-Gaussian policy at sigmoid(logit), including
// the squash correction term.
double squashed_gaussian_logprob(double logit, double mean, double stddev);

// ---- curriculum ----

struct CurriculumConfig {
  PortfolioSet portfolios;
  bool inflation = false;  // draw Vasicek parameters per scenario
};

// Fresh training scenario: horizon uniform on {5..50}, goal count from the
// pinned distribution with one goal forced at T, costs 100*u1*1.03^t,
// utilities 30*u1 + 25*u2, initial wealth between the two discount-sum
// extremes. Level draws use 1 - uniform01() so costs stay positive.
Scenario generate_scenario(Rng& rng, const CurriculumConfig& cfg);

// ---- ensemble ----

struct EnsembleMember {
  std::uint64_t seed = 0;
  AgentNets goal;
  AgentNets portfolio;
};

struct PolicyEnsemble {
  int input_dim = kStateDim;
  std::vector<EnsembleMember> members;
  PpoConfig config;
  std::uint64_t scenario_seed = 0;
  int epochs_done = 0;

  bool inflation_aware() const { return input_dim == kStateDim + 1; }
};

// Member-wise median of the actor outputs; deterministic (no noise).
Eigen::RowVectorXd infer_goal_actions(const PolicyEnsemble& ens, const Eigen::MatrixXd& states);
Eigen::RowVectorXd infer_portfolio_actions(const PolicyEnsemble& ens, const Eigen::MatrixXd& states);
std::pair<double, double> infer_action(const PolicyEnsemble& ens, const StateVector& state);

// ---- training ----

struct TrainSetup {
  PpoConfig ppo;
  PortfolioSet portfolios;
  std::uint64_t scenario_seed = 1;
  std::vector<std::uint64_t> member_seeds;  // defaults to 1..seeds when empty
  bool inflation = false;                   // 27-input networks, Vasicek draws
  int curve_paths = 200;   // Monte Carlo paths behind the monitoring curve
  int curve_nodes = 150;   // grid density for the per-epoch reference value
  // > 0: pause once this many epochs are done in total (checkpoint and
  // resume later); 0 runs to the configured epoch count.
  int stop_after_epochs = 0;
};

struct TrainResult {
  PolicyEnsemble ensemble;
  TextTable curves;          // epoch, per-seed efficiency, mean, std
  std::string abort_reason;  // empty when all epochs completed
};

// Full training loop: per epoch one fresh scenario shared by all members,
// episodes with jittered initial wealth and exploration noise, PPO updates,
// rho and exploration-std annealing, efficiency-style monitoring curve.
// Pass `resume_from` (a checkpoint with epochs_done < config epochs) to
// continue a run; determinism is keyed by (seed, epoch, episode), so the
// result is identical to an uninterrupted run.
TrainResult train(const TrainSetup& setup, const PolicyEnsemble* resume_from = nullptr);

// ---- checkpoints ----

// Binary, versioned, checksummed; includes optimizer state and provenance so
// training can resume exactly.
void save_checkpoint(const PolicyEnsemble& ens, const std::string& path);
PolicyEnsemble load_checkpoint(const std::string& path);

}  // namespace gbwm
