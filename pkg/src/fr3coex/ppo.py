"""Actor-critic PPO written directly in numpy.

Two small tanh MLPs (separate bodies), a standalone log-std vector for the
continuous heads, Bernoulli logits for the mute heads, clipped-surrogate
loss with manual reverse-mode gradients, and an in-repo adaptive-moment
optimizer.  Continuous actions are scored on the raw pre-squash Gaussian;
the environment's decode step applies the bounded squash, so no Jacobian
correction appears in the log-density.

Determinism: parameter init, minibatch shuffling, and each rollout worker
draw from fixed SeedSequence salts of the one training seed, and workers
are always merged in worker order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .config import PpoSection

_INIT_SALT = 999979
_LEARNER_SALT = 999983

CHECKPOINT_FORMAT = "fr3coex-policy"
CHECKPOINT_VERSION = 1

LOG_2PI = math.log(2.0 * math.pi)


def softplus(x):
    return np.logaddexp(0.0, x)


@dataclass
class Hyperparams:
    clip_epsilon: float = 0.2
    discount: float = 0.99
    gae_lambda: float = 0.95
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    epochs_per_update: int = 4
    minibatch_size: int = 64
    rollout_steps: int | None = None  # None: one full episode per worker
    entropy_coeff: float = 0.01
    max_grad_norm: float = 0.5
    seed: int = 1
    value_coeff: float = 0.5
    n_workers: int = 4
    hidden_sizes: tuple = (64, 64)
    advantage: str = "gae"
    log_std_init: float = -0.5

    def __post_init__(self):
        if not 0.0 < self.clip_epsilon < 1.0:
            raise ValueError("clip_epsilon must lie in (0,1)")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError("discount must lie in (0,1]")
        if self.actor_lr <= 0.0 or self.critic_lr <= 0.0:
            raise ValueError("learning rates must be positive")
        if self.epochs_per_update < 1 or self.minibatch_size < 1 or self.n_workers < 1:
            raise ValueError("epochs, minibatch size, and workers must be positive")
        if self.advantage not in ("gae", "paper"):
            raise ValueError(f"advantage must be gae|paper, got {self.advantage!r}")
        if not self.hidden_sizes:
            raise ValueError("need at least one hidden layer")
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)

    @classmethod
    def from_section(cls, section: PpoSection, seed: int) -> "Hyperparams":
        return cls(
            clip_epsilon=section.clip_epsilon,
            discount=section.discount,
            gae_lambda=section.gae_lambda,
            actor_lr=section.actor_lr,
            critic_lr=section.critic_lr,
            epochs_per_update=section.epochs_per_update,
            minibatch_size=section.minibatch_size,
            rollout_steps=section.rollout_steps,
            entropy_coeff=section.entropy_coeff,
            max_grad_norm=section.max_grad_norm,
            seed=int(seed),
            value_coeff=section.value_coeff,
            n_workers=section.n_workers,
            hidden_sizes=section.hidden_sizes,
            advantage=section.advantage,
            log_std_init=section.log_std_init,
        )


@dataclass
class PolicyParams:
    actor_weights: list
    actor_biases: list
    critic_weights: list
    critic_biases: list
    log_std: np.ndarray
    obs_dim: int
    n_continuous: int
    n_binary: int
    hidden_sizes: tuple
    activation: str = "tanh"


def iter_arrays(params: PolicyParams):
    """(name, array) pairs in a fixed order shared by grads and optimizer."""
    for i, (w, b) in enumerate(zip(params.actor_weights, params.actor_biases)):
        yield f"actor_w{i}", w
        yield f"actor_b{i}", b
    yield "log_std", params.log_std
    for i, (w, b) in enumerate(zip(params.critic_weights, params.critic_biases)):
        yield f"critic_w{i}", w
        yield f"critic_b{i}", b


def init_policy(obs_dim: int, n_continuous: int, n_binary: int, hp: Hyperparams) -> PolicyParams:
    """Scaled-normal hidden layers, zero final layers.

    Zeroing the output layers puts every continuous mean at its squash
    midpoint, every mute probability at 0.5, and the value at 0.
    """
    rng = np.random.default_rng(np.random.SeedSequence([hp.seed, _INIT_SALT]))

    def mlp(sizes):
        ws, bs = [], []
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            last = i == len(sizes) - 2
            if last:
                w = np.zeros((fan_in, fan_out))
            else:
                w = rng.normal(0.0, math.sqrt(2.0 / (fan_in + fan_out)), (fan_in, fan_out))
            ws.append(w)
            bs.append(np.zeros(fan_out))
        return ws, bs

    hidden = list(hp.hidden_sizes)
    aw, ab = mlp([obs_dim] + hidden + [n_continuous + n_binary])
    cw, cb = mlp([obs_dim] + hidden + [1])
    return PolicyParams(
        actor_weights=aw,
        actor_biases=ab,
        critic_weights=cw,
        critic_biases=cb,
        log_std=np.full(n_continuous, float(hp.log_std_init)),
        obs_dim=obs_dim,
        n_continuous=n_continuous,
        n_binary=n_binary,
        hidden_sizes=tuple(hidden),
    )


@dataclass
class DistParams:
    mean: np.ndarray
    log_std: np.ndarray
    logits: np.ndarray


def _check_finite_params(params: PolicyParams):
    for name, a in iter_arrays(params):
        if not np.all(np.isfinite(a)):
            raise ValueError(f"non-finite values in parameter {name}")


def _mlp_forward(ws, bs, x):
    """Returns (output, hidden activations) for the backward pass."""
    hs = [x]
    h = x
    for w, b in zip(ws[:-1], bs[:-1]):
        h = np.tanh(h @ w + b)
        hs.append(h)
    return h @ ws[-1] + bs[-1], hs


def policy_forward(params: PolicyParams, obs):
    """Distribution parameters and value estimate; batched when obs is 2-D."""
    _check_finite_params(params)
    obs = np.asarray(obs, dtype=float)
    single = obs.ndim == 1
    x = obs[None, :] if single else obs
    if x.shape[1] != params.obs_dim:
        raise ValueError(f"observation dim {x.shape[1]} != expected {params.obs_dim}")

    out, _ = _mlp_forward(params.actor_weights, params.actor_biases, x)
    vout, _ = _mlp_forward(params.critic_weights, params.critic_biases, x)
    mean = out[:, : params.n_continuous]
    logits = out[:, params.n_continuous :]
    values = vout[:, 0]
    if single:
        return DistParams(mean[0], params.log_std.copy(), logits[0]), float(values[0])
    log_std = np.broadcast_to(params.log_std, mean.shape)
    return DistParams(mean, log_std, logits), values


def log_prob_of(dist: DistParams, action) -> float | np.ndarray:
    """Joint log-density of raw continuous parts and mass of binary parts."""
    action = np.asarray(action, dtype=float)
    mean = np.atleast_2d(dist.mean)
    log_std = np.broadcast_to(np.atleast_2d(dist.log_std), mean.shape)
    logits = np.atleast_2d(dist.logits)
    act = np.atleast_2d(action)
    n_cont = mean.shape[1]
    a_cont, a_bin = act[:, :n_cont], act[:, n_cont:]

    u = (a_cont - mean) / np.exp(log_std)
    lp_cont = np.sum(-0.5 * u * u - log_std - 0.5 * LOG_2PI, axis=1)
    lp_bin = np.sum(
        a_bin * (-softplus(-logits)) + (1.0 - a_bin) * (-softplus(logits)), axis=1
    )
    lp = lp_cont + lp_bin
    return float(lp[0]) if np.asarray(dist.mean).ndim == 1 else lp


def sample_action(dist: DistParams, rng: np.random.Generator):
    """Raw action (Gaussian continuous entries, 0/1 mute entries) plus log-prob."""
    mean = np.asarray(dist.mean, dtype=float)
    std = np.exp(np.asarray(dist.log_std, dtype=float))
    a_cont = mean + std * rng.standard_normal(mean.shape)
    p = expit(np.asarray(dist.logits, dtype=float))
    a_bin = (rng.random(p.shape) < p).astype(float)
    raw = np.concatenate([a_cont, a_bin])
    return raw, log_prob_of(dist, raw)


def deterministic_action(dist: DistParams) -> np.ndarray:
    """Evaluation-time action: means and thresholded mute probabilities."""
    mute = (expit(np.asarray(dist.logits, dtype=float)) > 0.5).astype(float)
    return np.concatenate([np.asarray(dist.mean, dtype=float), mute])


@dataclass
class Trajectory:
    observations: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    bootstrap_value: float = 0.0

    def __post_init__(self):
        n = len(self.rewards)
        if n == 0:
            raise ValueError("empty trajectory")
        for name in ("observations", "actions", "log_probs", "values", "dones"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"trajectory field {name} length mismatch")
        if not np.all(np.isfinite(self.log_probs)):
            raise ValueError("non-finite log-probs in trajectory")


def _normalize_advantages(adv: np.ndarray) -> np.ndarray:
    var = float(np.var(adv))
    if var < 1e-8:
        return adv
    return (adv - np.mean(adv)) / math.sqrt(var)


def compute_advantages(traj: Trajectory, hp: Hyperparams, normalize: bool = True):
    """(advantages, returns); returns are discounted rewards-to-go with bootstrap."""
    n = len(traj.rewards)
    returns = np.empty(n)
    run = float(traj.bootstrap_value)
    for t in range(n - 1, -1, -1):
        if traj.dones[t]:
            run = 0.0
        run = traj.rewards[t] + hp.discount * run
        returns[t] = run

    if hp.advantage == "paper":
        adv = returns - traj.values
    else:
        adv = np.empty(n)
        carry = 0.0
        for t in range(n - 1, -1, -1):
            if traj.dones[t]:
                next_v = 0.0
                carry = 0.0
            elif t == n - 1:
                next_v = float(traj.bootstrap_value)
            else:
                next_v = float(traj.values[t + 1])
            delta = traj.rewards[t] + hp.discount * next_v - traj.values[t]
            carry = delta + hp.discount * hp.gae_lambda * carry
            adv[t] = carry

    if normalize:
        adv = _normalize_advantages(adv)
    return adv, returns


def ppo_loss(
    params: PolicyParams,
    batch: dict,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    hp: Hyperparams,
    return_parts: bool = False,
):
    """Scalar loss and gradients for every parameter array.

    loss = -clipped surrogate + value_coeff*(V-R)^2 - entropy_coeff*entropy,
    gradients by hand-written reverse accumulation through both MLPs.
    """
    obs = np.asarray(batch["observations"], dtype=float)
    actions = np.asarray(batch["actions"], dtype=float)
    old_lp = np.asarray(old_log_probs, dtype=float)
    adv = np.asarray(advantages, dtype=float)
    ret = np.asarray(returns, dtype=float)
    b = obs.shape[0]
    nc = params.n_continuous

    out, ah = _mlp_forward(params.actor_weights, params.actor_biases, obs)
    vout, ch = _mlp_forward(params.critic_weights, params.critic_biases, obs)
    mean = out[:, :nc]
    logits = out[:, nc:]
    values = vout[:, 0]

    a_cont, a_bin = actions[:, :nc], actions[:, nc:]
    std = np.exp(params.log_std)
    u = (a_cont - mean) / std
    lp = (
        np.sum(-0.5 * u * u - params.log_std - 0.5 * LOG_2PI, axis=1)
        + np.sum(a_bin * (-softplus(-logits)) + (1.0 - a_bin) * (-softplus(logits)), axis=1)
    )

    ratio = np.exp(lp - old_lp)
    surr1 = ratio * adv
    surr2 = np.clip(ratio, 1.0 - hp.clip_epsilon, 1.0 + hp.clip_epsilon) * adv
    take1 = surr1 <= surr2
    policy_loss = -float(np.mean(np.minimum(surr1, surr2)))

    p = expit(logits)
    h_bern = p * softplus(-logits) + (1.0 - p) * softplus(logits)
    h_cont = float(np.sum(params.log_std + 0.5 * (LOG_2PI + 1.0)))
    entropy = h_cont + float(np.mean(np.sum(h_bern, axis=1)))

    verr = values - ret
    value_loss = float(np.mean(verr * verr))

    loss = policy_loss + hp.value_coeff * value_loss - hp.entropy_coeff * entropy

    # ---- backward ----
    # surrogate: d(-mean(min))/dlp = -(1/B) * adv * ratio on the unclipped branch
    g_lp = np.where(take1, -(adv * ratio) / b, 0.0)

    g_mean = g_lp[:, None] * (u / std)
    g_logstd = np.einsum("b,bj->j", g_lp, u * u - 1.0) - hp.entropy_coeff
    g_logits = g_lp[:, None] * (a_bin - p) + (hp.entropy_coeff / b) * (
        logits * p * (1.0 - p)
    )
    g_out = np.concatenate([g_mean, g_logits], axis=1)

    def mlp_backward(ws, hs, g_last):
        gws, gbs = [None] * len(ws), [None] * len(ws)
        g = g_last
        for i in range(len(ws) - 1, -1, -1):
            gws[i] = hs[i].T @ g
            gbs[i] = g.sum(axis=0)
            if i > 0:
                g = (g @ ws[i].T) * (1.0 - hs[i] * hs[i])
        return gws, gbs

    g_aw, g_ab = mlp_backward(params.actor_weights, ah, g_out)
    g_v = (2.0 * hp.value_coeff / b) * verr
    g_cw, g_cb = mlp_backward(params.critic_weights, ch, g_v[:, None])

    grads = PolicyParams(
        actor_weights=g_aw,
        actor_biases=g_ab,
        critic_weights=g_cw,
        critic_biases=g_cb,
        log_std=g_logstd,
        obs_dim=params.obs_dim,
        n_continuous=nc,
        n_binary=params.n_binary,
        hidden_sizes=params.hidden_sizes,
    )

    bad = [] if np.isfinite(loss) else ["loss"]
    bad += [name for name, a in iter_arrays(grads) if not np.all(np.isfinite(a))]
    if bad:
        raise FloatingPointError(
            "non-finite values during the update in: " + ", ".join(bad)
        )

    if return_parts:
        parts = {"policy_loss": policy_loss, "value_loss": value_loss, "entropy": entropy}
        return float(loss), grads, parts
    return float(loss), grads


def clip_grad_norm(grads: PolicyParams, max_norm: float) -> float:
    total = math.sqrt(sum(float(np.sum(a * a)) for _, a in iter_arrays(grads)))
    if max_norm > 0.0 and total > max_norm:
        scale = max_norm / total
        for _, a in iter_arrays(grads):
            a *= scale
    return total


class Adam:
    """Adaptive moment estimation with bias correction, one slot per array."""

    def __init__(self, hp: Hyperparams, beta1=0.9, beta2=0.999, eps=1e-8):
        self.hp = hp
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m: dict = {}
        self.v: dict = {}

    def step(self, params: PolicyParams, grads: PolicyParams):
        self.t += 1
        garrs = dict(iter_arrays(grads))
        for name, a in iter_arrays(params):
            g = garrs[name]
            lr = self.hp.critic_lr if name.startswith("critic") else self.hp.actor_lr
            m = self.m.setdefault(name, np.zeros_like(a))
            v = self.v.setdefault(name, np.zeros_like(a))
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            mhat = m / (1.0 - self.beta1**self.t)
            vhat = v / (1.0 - self.beta2**self.t)
            a -= lr * mhat / (np.sqrt(vhat) + self.eps)


@dataclass
class LearningCurve:
    updates: np.ndarray
    mean_reward: np.ndarray
    policy_loss: np.ndarray
    value_loss: np.ndarray
    entropy: np.ndarray


@dataclass
class TrainResult:
    params: PolicyParams
    curve: LearningCurve
    episode_rewards: list = field(default_factory=list)


class TrainingDiverged(RuntimeError):
    def __init__(self, message, result: TrainResult):
        super().__init__(message)
        self.result = result


class _Worker:
    """One persistent environment stream; actions drawn from its own rng."""

    def __init__(self, env, seed, index):
        self.env = env
        self.rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))
        self.obs = env.reset()
        self.episode_return = 0.0

    def collect(self, params, n_steps, finished_returns):
        obs_l, act_l, lp_l, rew_l, val_l, done_l = [], [], [], [], [], []
        for _ in range(n_steps):
            dist, value = policy_forward(params, self.obs)
            raw, lp = sample_action(dist, self.rng)
            res = self.env.step(self.env.decode_action(raw))
            obs_l.append(self.obs)
            act_l.append(raw)
            lp_l.append(lp)
            rew_l.append(res.reward)
            val_l.append(value)
            done_l.append(res.done)
            self.episode_return += res.reward
            if res.done:
                finished_returns.append(self.episode_return)
                self.episode_return = 0.0
                self.obs = self.env.reset()
            else:
                self.obs = res.observation
        if done_l[-1]:
            bootstrap = 0.0
        else:
            _, bootstrap = policy_forward(params, self.obs)
        return Trajectory(
            observations=np.array(obs_l),
            actions=np.array(act_l),
            log_probs=np.array(lp_l),
            rewards=np.array(rew_l),
            values=np.array(val_l),
            dones=np.array(done_l, dtype=bool),
            bootstrap_value=float(bootstrap),
        )


def train(
    env_factory,
    hp: Hyperparams,
    n_updates: int = 500,
    reward_normalizer: float = 1.0,
    checkpoint_dir=None,
    checkpoint_every: int = 0,
    progress=None,
) -> TrainResult:
    """PPO loop: collect from workers in fixed order, update in minibatches.

    env_factory(worker_index) builds one environment per worker; the curve
    holds per-update means of finished-episode rewards divided by
    reward_normalizer.  If the 10-update running average of that series
    falls 0.5 below its initial value for 50 straight updates, training
    aborts with the partial result attached.
    """
    envs = [env_factory(w) for w in range(hp.n_workers)]
    params = init_policy(envs[0].obs_dim, envs[0].n_continuous, envs[0].n_binary, hp)
    workers = [_Worker(env, hp.seed, w) for w, env in enumerate(envs)]
    learner_rng = np.random.default_rng(np.random.SeedSequence([hp.seed, _LEARNER_SALT]))
    opt = Adam(hp)

    steps_per_worker = hp.rollout_steps or envs[0].n_steps
    cur_updates, cur_reward, cur_pl, cur_vl, cur_ent = [], [], [], [], []
    episode_rewards = []
    last_mean = 0.0
    guard_initial = None
    guard_bad = 0

    for update in range(n_updates):
        finished = []
        trajs = [w.collect(params, steps_per_worker, finished) for w in workers]
        adv_l, ret_l = [], []
        for traj in trajs:
            a, r = compute_advantages(traj, hp, normalize=False)
            adv_l.append(a)
            ret_l.append(r)
        obs = np.concatenate([t.observations for t in trajs])
        acts = np.concatenate([t.actions for t in trajs])
        old_lp = np.concatenate([t.log_probs for t in trajs])
        adv = _normalize_advantages(np.concatenate(adv_l))
        ret = np.concatenate(ret_l)

        n = len(obs)
        parts_acc = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0}
        n_batches = 0
        for _ in range(hp.epochs_per_update):
            perm = learner_rng.permutation(n)
            for lo in range(0, n, hp.minibatch_size):
                idx = perm[lo : lo + hp.minibatch_size]
                batch = {"observations": obs[idx], "actions": acts[idx]}
                _, grads, parts = ppo_loss(
                    params, batch, old_lp[idx], adv[idx], ret[idx], hp, return_parts=True
                )
                clip_grad_norm(grads, hp.max_grad_norm)
                opt.step(params, grads)
                for k in parts_acc:
                    parts_acc[k] += parts[k]
                n_batches += 1

        episode_rewards.extend(finished)
        if finished:
            last_mean = float(np.mean(finished)) / reward_normalizer
        cur_updates.append(update)
        cur_reward.append(last_mean)
        cur_pl.append(parts_acc["policy_loss"] / n_batches)
        cur_vl.append(parts_acc["value_loss"] / n_batches)
        cur_ent.append(parts_acc["entropy"] / n_batches)

        window = cur_reward[-10:]
        running = float(np.mean(window))
        if guard_initial is None:
            guard_initial = running
        if running < guard_initial - 0.5:
            guard_bad += 1
        else:
            guard_bad = 0
        if guard_bad >= 50:
            result = TrainResult(params, _curve(cur_updates, cur_reward, cur_pl, cur_vl, cur_ent), episode_rewards)
            raise TrainingDiverged(
                f"running-average reward {running:.3f} stayed below "
                f"{guard_initial - 0.5:.3f} for 50 updates (at update {update})",
                result,
            )

        if checkpoint_dir is not None and checkpoint_every > 0 and (update + 1) % checkpoint_every == 0:
            from pathlib import Path

            path = Path(checkpoint_dir) / f"policy_update{update + 1:05d}.npz"
            save_params(params, path)
        if progress is not None:
            progress(update, last_mean)

    return TrainResult(params, _curve(cur_updates, cur_reward, cur_pl, cur_vl, cur_ent), episode_rewards)


def _curve(updates, reward, pl, vl, ent) -> LearningCurve:
    return LearningCurve(
        updates=np.array(updates),
        mean_reward=np.array(reward),
        policy_loss=np.array(pl),
        value_loss=np.array(vl),
        entropy=np.array(ent),
    )


def save_params(params: PolicyParams, path):
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "obs_dim": params.obs_dim,
        "n_continuous": params.n_continuous,
        "n_binary": params.n_binary,
        "hidden_sizes": list(params.hidden_sizes),
        "activation": params.activation,
        "n_actor_layers": len(params.actor_weights),
        "n_critic_layers": len(params.critic_weights),
    }
    arrays = dict(iter_arrays(params))
    np.savez(path, meta=np.array(json.dumps(meta)), **arrays)


def load_params(path, obs_dim=None, n_continuous=None, n_binary=None) -> PolicyParams:
    try:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            arrays = {k: z[k] for k in z.files if k != "meta"}
    except Exception as err:
        raise ValueError(f"unreadable checkpoint {path}: {err}") from err
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a policy checkpoint")
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {meta.get('version')!r}")

    for label, expect, have in (
        ("obs_dim", obs_dim, meta["obs_dim"]),
        ("n_continuous", n_continuous, meta["n_continuous"]),
        ("n_binary", n_binary, meta["n_binary"]),
    ):
        if expect is not None and expect != have:
            raise ValueError(
                f"{path}: architecture mismatch: {label} expected {expect}, checkpoint has {have}"
            )

    try:
        params = PolicyParams(
            actor_weights=[arrays[f"actor_w{i}"] for i in range(meta["n_actor_layers"])],
            actor_biases=[arrays[f"actor_b{i}"] for i in range(meta["n_actor_layers"])],
            critic_weights=[arrays[f"critic_w{i}"] for i in range(meta["n_critic_layers"])],
            critic_biases=[arrays[f"critic_b{i}"] for i in range(meta["n_critic_layers"])],
            log_std=arrays["log_std"],
            obs_dim=int(meta["obs_dim"]),
            n_continuous=int(meta["n_continuous"]),
            n_binary=int(meta["n_binary"]),
            hidden_sizes=tuple(meta["hidden_sizes"]),
            activation=meta.get("activation", "tanh"),
        )
    except KeyError as err:
        raise ValueError(f"{path}: checkpoint missing array {err}") from None
    _check_finite_params(params)
    return params
