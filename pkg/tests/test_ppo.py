import math

import numpy as np
import numpy.testing as npt
import pytest

from fr3coex.ppo import (
    Adam,
    DistParams,
    Hyperparams,
    PolicyParams,
    Trajectory,
    TrainingDiverged,
    clip_grad_norm,
    compute_advantages,
    deterministic_action,
    init_policy,
    iter_arrays,
    load_params,
    log_prob_of,
    policy_forward,
    ppo_loss,
    sample_action,
    save_params,
    train,
)

from toy_envs import CollapsingEnv, CorridorEnv


def small_hp(**kw):
    base = dict(seed=3, hidden_sizes=(4,))
    base.update(kw)
    return Hyperparams(**base)


def random_params(rng, obs_dim, n_cont, n_bin, hidden=(4,)):
    hp = small_hp(hidden_sizes=hidden)
    p = init_policy(obs_dim, n_cont, n_bin, hp)
    for _, a in iter_arrays(p):
        a += rng.normal(scale=0.3, size=a.shape)
    return p


def random_batch(rng, params, b=5, ratio_halfwidth=0.1):
    obs = rng.normal(size=(b, params.obs_dim))
    dist, _ = policy_forward(params, obs)
    n_cont = params.n_continuous
    a_cont = dist.mean + np.exp(params.log_std) * rng.normal(size=(b, n_cont))
    a_bin = (rng.random((b, params.n_binary)) < 0.5).astype(float)
    actions = np.concatenate([a_cont, a_bin], axis=1)
    lp = log_prob_of(dist, actions)
    # keep ratios strictly inside the clip band so the loss is smooth
    old_lp = lp + rng.uniform(-ratio_halfwidth, ratio_halfwidth, size=b)
    adv = rng.normal(size=b)
    ret = rng.normal(size=b)
    return {"observations": obs, "actions": actions}, old_lp, adv, ret


def test_zero_init_heads():
    hp = small_hp()
    p = init_policy(5, 3, 2, hp)
    dist, value = policy_forward(p, np.array([0.3, -0.2, 0.9, 0.0, 1.0]))
    npt.assert_array_equal(dist.mean, 0.0)
    npt.assert_array_equal(dist.logits, 0.0)
    assert value == 0.0
    npt.assert_array_equal(dist.log_std, hp.log_std_init)


def test_forward_deterministic_and_shape_checks():
    p = init_policy(4, 2, 1, small_hp())
    obs = np.array([0.1, 0.2, 0.3, 0.4])
    d1, v1 = policy_forward(p, obs)
    d2, v2 = policy_forward(p, obs)
    npt.assert_array_equal(d1.mean, d2.mean)
    assert v1 == v2
    with pytest.raises(ValueError, match="observation dim"):
        policy_forward(p, np.zeros(3))
    p.actor_weights[0][0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        policy_forward(p, obs)


def test_sample_action_reproducible_and_degenerate():
    p = random_params(np.random.default_rng(0), 3, 2, 2)
    dist, _ = policy_forward(p, np.array([0.1, -0.3, 0.5]))
    a1, lp1 = sample_action(dist, np.random.default_rng(99))
    a2, lp2 = sample_action(dist, np.random.default_rng(99))
    npt.assert_array_equal(a1, a2)
    assert lp1 == lp2

    tight = DistParams(dist.mean, np.full(2, -10.0), dist.logits)
    a, _ = sample_action(tight, np.random.default_rng(1))
    npt.assert_allclose(a[:2], dist.mean, atol=1e-4)

    sure = DistParams(dist.mean, dist.log_std, np.full(2, 40.0))
    a, _ = sample_action(sure, np.random.default_rng(2))
    npt.assert_array_equal(a[2:], 1.0)
    lp_bin_only = log_prob_of(
        DistParams(np.zeros(0), np.zeros(0), sure.logits), a[2:]
    )
    npt.assert_allclose(lp_bin_only, 0.0, atol=1e-12)


def test_log_prob_manual_arithmetic():
    mean = np.array([0.3])
    log_std = np.array([-0.5])
    logits = np.array([0.3])
    action = np.array([0.5, 1.0])
    got = log_prob_of(DistParams(mean, log_std, logits), action)
    sigma = math.exp(-0.5)
    want_cont = -0.5 * ((0.5 - 0.3) / sigma) ** 2 - (-0.5) - 0.5 * math.log(2 * math.pi)
    want_bin = -math.log1p(math.exp(-0.3))
    npt.assert_allclose(got, want_cont + want_bin, atol=1e-12)


def test_deterministic_action_thresholds():
    d = DistParams(np.array([0.7]), np.array([-0.5]), np.array([0.2, -0.2, 0.0]))
    a = deterministic_action(d)
    npt.assert_array_equal(a, [0.7, 1.0, 0.0, 0.0])  # logit 0 -> p=0.5 -> unmuted


def test_returns_single_step_paper_form():
    hp = small_hp(discount=1.0, advantage="paper")
    traj = Trajectory(
        observations=np.zeros((1, 1)),
        actions=np.zeros((1, 1)),
        log_probs=np.zeros(1),
        rewards=np.array([1.0]),
        values=np.array([0.3]),
        dones=np.array([True]),
    )
    adv, ret = compute_advantages(traj, hp)
    npt.assert_allclose(ret, [1.0])
    npt.assert_allclose(adv, [0.7])  # single sample: variance guard skips normalization


def test_returns_discounted_pair():
    hp = small_hp(discount=0.5, advantage="paper")
    traj = Trajectory(
        observations=np.zeros((2, 1)),
        actions=np.zeros((2, 1)),
        log_probs=np.zeros(2),
        rewards=np.array([1.0, 1.0]),
        values=np.zeros(2),
        dones=np.array([False, True]),
    )
    adv, ret = compute_advantages(traj, hp, normalize=False)
    npt.assert_allclose(ret, [1.5, 1.0])
    npt.assert_allclose(adv, [1.5, 1.0])
    adv_n, _ = compute_advantages(traj, hp)
    npt.assert_allclose(adv_n, [1.0, -1.0], atol=1e-12)


def test_gae_hand_rolled_case():
    hp = small_hp(discount=0.9, gae_lambda=0.8, advantage="gae")
    traj = Trajectory(
        observations=np.zeros((2, 1)),
        actions=np.zeros((2, 1)),
        log_probs=np.zeros(2),
        rewards=np.array([1.0, 2.0]),
        values=np.array([0.5, 1.0]),
        dones=np.array([False, False]),
        bootstrap_value=2.0,
    )
    adv, ret = compute_advantages(traj, hp, normalize=False)
    npt.assert_allclose(ret, [1.0 + 0.9 * 3.8, 2.0 + 0.9 * 2.0])
    delta1 = 2.0 + 0.9 * 2.0 - 1.0
    delta0 = 1.0 + 0.9 * 1.0 - 0.5
    npt.assert_allclose(adv, [delta0 + 0.9 * 0.8 * delta1, delta1])


def test_gae_resets_across_episode_boundary():
    hp = small_hp(discount=0.9, gae_lambda=0.8, advantage="gae")
    traj = Trajectory(
        observations=np.zeros((2, 1)),
        actions=np.zeros((2, 1)),
        log_probs=np.zeros(2),
        rewards=np.array([1.0, 2.0]),
        values=np.array([0.5, 1.0]),
        dones=np.array([True, False]),
        bootstrap_value=2.0,
    )
    adv, ret = compute_advantages(traj, hp, normalize=False)
    # step 0 ends its episode: no value bootstraps across the boundary
    npt.assert_allclose(ret[0], 1.0)
    npt.assert_allclose(adv[0], 1.0 - 0.5)


def test_flat_advantages_skip_normalization():
    hp = small_hp(discount=1.0, advantage="paper")
    traj = Trajectory(
        observations=np.zeros((3, 1)),
        actions=np.zeros((3, 1)),
        log_probs=np.zeros(3),
        rewards=np.ones(3),
        values=np.array([3.0, 2.0, 1.0]),
        dones=np.array([False, False, True]),
    )
    adv, _ = compute_advantages(traj, hp)
    npt.assert_allclose(adv, 0.0, atol=1e-12)


def test_normalization_preserves_order():
    hp = small_hp(advantage="paper", discount=0.99)
    rng = np.random.default_rng(4)
    traj = Trajectory(
        observations=np.zeros((8, 1)),
        actions=np.zeros((8, 1)),
        log_probs=np.zeros(8),
        rewards=rng.normal(size=8),
        values=rng.normal(size=8),
        dones=np.array([False] * 7 + [True]),
    )
    raw, _ = compute_advantages(traj, hp, normalize=False)
    norm, _ = compute_advantages(traj, hp)
    npt.assert_array_equal(np.argsort(raw), np.argsort(norm))


def test_empty_trajectory_rejected():
    with pytest.raises(ValueError, match="empty"):
        Trajectory(
            observations=np.zeros((0, 1)),
            actions=np.zeros((0, 1)),
            log_probs=np.zeros(0),
            rewards=np.zeros(0),
            values=np.zeros(0),
            dones=np.zeros(0, dtype=bool),
        )


def test_loss_ratio_identity_at_old_params():
    rng = np.random.default_rng(7)
    p = random_params(rng, 3, 2, 1)
    batch, old_lp, adv, ret = random_batch(rng, p, b=6, ratio_halfwidth=0.0)
    hp = small_hp(value_coeff=0.0, entropy_coeff=0.0)
    loss, _ = ppo_loss(p, batch, old_lp, adv, ret, hp)
    npt.assert_allclose(loss, -np.mean(adv), atol=1e-12)


def test_loss_clip_arithmetic():
    rng = np.random.default_rng(8)
    p = random_params(rng, 2, 1, 1)
    obs = rng.normal(size=(1, 2))
    dist, _ = policy_forward(p, obs)
    action = np.concatenate([dist.mean[0] + 0.3, [1.0]])[None, :]
    lp = log_prob_of(DistParams(dist.mean, dist.log_std, dist.logits), action)
    hp = small_hp(clip_epsilon=0.2, value_coeff=0.0, entropy_coeff=0.0)
    batch = {"observations": obs, "actions": action}

    # ratio 1.5, advantage 2 -> min(3.0, 2.4) = 2.4
    loss, _ = ppo_loss(p, batch, lp - math.log(1.5), np.array([2.0]), np.zeros(1), hp)
    npt.assert_allclose(loss, -2.4, atol=1e-9)
    # ratio 0.5, advantage -1 -> min(-0.5, -0.8) = -0.8
    loss, _ = ppo_loss(p, batch, lp - math.log(0.5), np.array([-1.0]), np.zeros(1), hp)
    npt.assert_allclose(loss, 0.8, atol=1e-9)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(12)
    hp = small_hp(clip_epsilon=0.2)
    for net in range(10):
        n_cont = int(rng.integers(0, 3))
        n_bin = int(rng.integers(0 if n_cont else 1, 3))
        obs_dim = int(rng.integers(2, 4))
        p = random_params(rng, obs_dim, n_cont, n_bin)
        batch, old_lp, adv, ret = random_batch(rng, p, b=5)
        _, grads = ppo_loss(p, batch, old_lp, adv, ret, hp)
        garr = dict(iter_arrays(grads))
        delta = 1e-5
        for name, a in iter_arrays(p):
            flat = a.reshape(-1)
            gflat = garr[name].reshape(-1)
            for i in range(flat.size):
                keep = flat[i]
                flat[i] = keep + delta
                up, _ = ppo_loss(p, batch, old_lp, adv, ret, hp)
                flat[i] = keep - delta
                dn, _ = ppo_loss(p, batch, old_lp, adv, ret, hp)
                flat[i] = keep
                fd = (up - dn) / (2.0 * delta)
                assert abs(gflat[i] - fd) <= 1e-4 * max(1.0, abs(fd)), (
                    f"net {net} {name}[{i}]: analytic {gflat[i]} vs fd {fd}"
                )


def test_loss_nan_detection():
    rng = np.random.default_rng(3)
    p = random_params(rng, 2, 1, 1)
    batch, old_lp, adv, ret = random_batch(rng, p, b=4)
    with pytest.raises(FloatingPointError, match="non-finite"):
        ppo_loss(p, batch, old_lp, np.array([np.nan, 1, 1, 1]), ret, small_hp())


def test_entropy_term_peaks_at_logit_zero():
    hp = small_hp(value_coeff=0.0, entropy_coeff=0.0)
    rng = np.random.default_rng(5)

    def entropy_with_bias(z):
        p = init_policy(2, 0, 1, small_hp())
        p.actor_biases[-1][0] = z
        batch = {
            "observations": rng.normal(size=(4, 2)),
            "actions": np.ones((4, 1)),
        }
        dist, _ = policy_forward(p, batch["observations"])
        lp = log_prob_of(dist, batch["actions"])
        _, _, parts = ppo_loss(
            p, batch, lp, np.zeros(4), np.zeros(4), hp, return_parts=True
        )
        return parts["entropy"]

    h0 = entropy_with_bias(0.0)
    npt.assert_allclose(h0, math.log(2.0), atol=1e-12)
    assert h0 > entropy_with_bias(1.0)
    assert h0 > entropy_with_bias(-2.0)


def test_clip_grad_norm_scales_to_cap():
    p = init_policy(2, 1, 1, small_hp())
    grads = init_policy(2, 1, 1, small_hp())
    for _, a in iter_arrays(grads):
        a[...] = 0.0
    grads.log_std[0] = 3.0
    grads.critic_biases[-1][0] = 4.0  # total norm 5
    norm = clip_grad_norm(grads, 0.5)
    npt.assert_allclose(norm, 5.0, atol=1e-12)
    npt.assert_allclose(grads.log_std[0], 0.3, atol=1e-12)
    npt.assert_allclose(grads.critic_biases[-1][0], 0.4, atol=1e-12)


def test_adam_first_step_and_lr_routing():
    hp = small_hp(actor_lr=1e-3, critic_lr=2e-3)
    p = init_policy(2, 1, 1, hp)
    before = {name: a.copy() for name, a in iter_arrays(p)}
    grads = init_policy(2, 1, 1, hp)
    for _, a in iter_arrays(grads):
        a[...] = 0.5
    Adam(hp).step(p, grads)
    for name, a in iter_arrays(p):
        step = before[name] - a
        lr = 2e-3 if name.startswith("critic") else 1e-3
        npt.assert_allclose(step, lr, rtol=1e-6)


def test_save_load_roundtrip_and_errors(tmp_path):
    p = random_params(np.random.default_rng(2), 4, 2, 3)
    path = tmp_path / "policy.npz"
    save_params(p, path)
    q = load_params(path)
    for (n1, a1), (n2, a2) in zip(iter_arrays(p), iter_arrays(q)):
        assert n1 == n2
        npt.assert_array_equal(a1, a2)
    assert (q.obs_dim, q.n_continuous, q.n_binary) == (4, 2, 3)

    with pytest.raises(ValueError, match="expected 7"):
        load_params(path, obs_dim=7)
    with pytest.raises(ValueError, match="n_binary expected 1"):
        load_params(path, n_binary=1)

    bad = tmp_path / "junk.npz"
    bad.write_bytes(b"not a real archive")
    with pytest.raises(ValueError, match="unreadable"):
        load_params(bad)

    other = tmp_path / "other.npz"
    np.savez(other, meta=np.array('{"format": "something-else"}'))
    with pytest.raises(ValueError, match="not a policy checkpoint"):
        load_params(other)


def test_train_deterministic_curve():
    hp = Hyperparams(
        seed=11,
        n_workers=2,
        hidden_sizes=(8,),
        minibatch_size=16,
        epochs_per_update=2,
        actor_lr=0.01,
        critic_lr=0.01,
    )

    def run():
        res = train(lambda w: CorridorEnv(), hp, n_updates=6, reward_normalizer=8.0)
        return res.curve

    c1, c2 = run(), run()
    npt.assert_array_equal(c1.mean_reward, c2.mean_reward)
    npt.assert_array_equal(c1.policy_loss, c2.policy_loss)
    npt.assert_array_equal(c1.value_loss, c2.value_loss)
    assert len(c1.updates) == 6


def test_train_improves_on_corridor():
    hp = Hyperparams(
        seed=0,
        n_workers=4,
        hidden_sizes=(16,),
        minibatch_size=32,
        epochs_per_update=4,
        actor_lr=0.01,
        critic_lr=0.01,
        entropy_coeff=0.005,
    )
    res = train(lambda w: CorridorEnv(), hp, n_updates=60, reward_normalizer=8.0)
    assert res.curve.mean_reward[-1] > res.curve.mean_reward[0]
    env = CorridorEnv()
    for s in (0.0, 1.0):
        dist, _ = policy_forward(res.params, np.array([s]))
        p_adv = 1.0 / (1.0 + math.exp(-float(dist.logits[0])))
        assert p_adv > 0.6, f"state {s}: advance probability only {p_adv:.3f}"
    del env


def test_divergence_guard_aborts_with_report():
    hp = Hyperparams(seed=1, n_workers=1, hidden_sizes=(4,), minibatch_size=8)
    with pytest.raises(TrainingDiverged, match="50 updates") as exc:
        train(
            lambda w: CollapsingEnv(good_episodes=2),
            hp,
            n_updates=120,
            reward_normalizer=1.0,
        )
    result = exc.value.result
    assert len(result.curve.updates) >= 50


def test_checkpointing_during_train(tmp_path):
    hp = Hyperparams(seed=5, n_workers=1, hidden_sizes=(4,), minibatch_size=8)
    train(
        lambda w: CorridorEnv(),
        hp,
        n_updates=4,
        checkpoint_dir=tmp_path,
        checkpoint_every=2,
    )
    files = sorted(f.name for f in tmp_path.glob("*.npz"))
    assert files == ["policy_update00002.npz", "policy_update00004.npz"]
    q = load_params(tmp_path / "policy_update00004.npz")
    assert q.obs_dim == 1 and q.n_binary == 1 and q.n_continuous == 0


def test_hyperparams_validation():
    with pytest.raises(ValueError, match="clip_epsilon"):
        Hyperparams(clip_epsilon=1.5)
    with pytest.raises(ValueError, match="discount"):
        Hyperparams(discount=0.0)
    with pytest.raises(ValueError, match="advantage"):
        Hyperparams(advantage="td")
    with pytest.raises(ValueError, match="hidden"):
        Hyperparams(hidden_sizes=())
