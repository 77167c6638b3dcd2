"""Jitted episode loops behind the simulator.

All randomness is counter-based: draw k of an episode stream is a pure
function of (episode_seed, k). Each slot consumes exactly two draws, one per
interface in interface order, no matter which interfaces transmit, so the
channel noise stream is identical for every agent sharing a seed. Draw 0 of a
stream picks the initial state.

Agent kind codes: 0 fixed, 1 full state, 2 hidden reduction, 3 forgetful
reduction, 4 belief averaging. Knowledge label codes match mdp.py.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U64 = np.uint64


@njit(cache=True, inline="always")
def _mix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


@njit(cache=True, inline="always")
def _uniform_at(seed, counter):
    z = _mix64(seed + _U64(counter) * _GOLDEN)
    return (z >> _U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _channel_step(x, p, r, u):
    if x == 0:
        return 1 if u < p else 0
    return 0 if u < r else 1


@njit(cache=True, inline="always")
def _decide(kind, n, o1, o2, e1, e2, b1, b2, fixed_ai, policy, q):
    if kind == 0:
        return fixed_ai
    if kind == 1:
        return policy[4 * n + 2 * o1 + o2]
    if kind == 2:
        return policy[9 * n + 3 * e1 + e2]
    if kind == 3:
        return policy[25 * n + 5 * e1 + e2]
    base = 4 * n
    w00 = b1 * b2
    w01 = b1 * (1.0 - b2)
    w10 = (1.0 - b1) * b2
    w11 = (1.0 - b1) * (1.0 - b2)
    best = 0
    best_val = -np.inf
    for a in range(3):
        val = (
            w00 * q[base, a]
            + w01 * q[base + 1, a]
            + w10 * q[base + 2, a]
            + w11 * q[base + 3, a]
        )
        if val > best_val:
            best_val = val
            best = a
    return best


@njit(cache=True, inline="always")
def _knowledge_advance(kind, e):
    if kind == 2:
        return 2
    if e == 0:
        return 2
    if e == 1:
        return 3
    return 4


@njit(cache=True)
def _episode(
    kind,
    alpha,
    env,  # p1, r1, p2, r2, c1, c2, success_reward, miss_reward
    init_cum,  # cumulative weights of (G,G,0), (G,B,0), (B,G,0)
    n_max,
    act_bits,
    fixed_ai,
    policy,
    q,
    model,  # p1, r1, p2, r2 as believed by the agent
    seed,
    n_counts,
):
    p1, r1, p2, r2 = env[0], env[1], env[2], env[3]
    c1, c2, success_reward, miss_reward = env[4], env[5], env[6], env[7]

    u0 = _uniform_at(seed, 0)
    if u0 < init_cum[0]:
        x1, x2, n = 0, 0, 0
    elif u0 < init_cum[1]:
        x1, x2, n = 0, 1, 0
    elif u0 < init_cum[2]:
        x1, x2, n = 1, 0, 0
    else:
        x1, x2, n = 1, 1, 1

    o1, o2 = x1, x2
    e1, e2 = x1, x2
    b1, b2 = 1.0 - x1, 1.0 - x2

    lifetime = 0
    total_reward = 0.0
    on1 = 0
    on2 = 0
    t = 0
    while n < n_max:
        ai = _decide(kind, n, o1, o2, e1, e2, b1, b2, fixed_ai, policy, q)
        a1 = act_bits[ai, 0]
        a2 = act_bits[ai, 1]

        u1 = _uniform_at(seed, 1 + 2 * t)
        u2 = _uniform_at(seed, 2 + 2 * t)
        x1 = _channel_step(x1, p1, r1, u1)
        x2 = _channel_step(x2, p2, r2, u2)

        n_counts[n] += 1
        lifetime += 1
        on1 += a1
        on2 += a2

        success = (a1 == 1 and x1 == 0) or (a2 == 1 and x2 == 0)
        n = 0 if success else n + 1
        total_reward += (success_reward if n == 0 else miss_reward) - (
            a1 * c1 + a2 * c2
        )

        see1 = a1 == 1 or alpha == 1
        see2 = a2 == 1 or alpha == 1
        if kind == 1:
            o1, o2 = x1, x2
        elif kind == 2 or kind == 3:
            e1 = x1 if see1 else _knowledge_advance(kind, e1)
            e2 = x2 if see2 else _knowledge_advance(kind, e2)
        elif kind == 4:
            b1 = (1.0 - x1) if see1 else (1.0 - model[0]) * b1 + model[1] * (1.0 - b1)
            b2 = (1.0 - x2) if see2 else (1.0 - model[2]) * b2 + model[3] * (1.0 - b2)
        t += 1
    return lifetime, total_reward, on1, on2


@njit(cache=True, parallel=True)
def run_batch_kernel(
    kind,
    alpha,
    env,
    init_cum,
    n_max,
    act_bits,
    fixed_ai,
    policy,
    q,
    model,
    seeds,
    lifetimes,
    rewards,
    n_counts,
    on_counts,
):
    for i in prange(seeds.shape[0]):
        life, rew, on1, on2 = _episode(
            kind,
            alpha,
            env,
            init_cum,
            n_max,
            act_bits,
            fixed_ai,
            policy,
            q,
            model,
            seeds[i],
            n_counts[i],
        )
        lifetimes[i] = life
        rewards[i] = rew
        on_counts[i, 0] = on1
        on_counts[i, 1] = on2


@njit(cache=True)
def _paired_episode(
    kind_a,
    alpha_a,
    act_a,
    fixed_a,
    pol_a,
    q_a,
    model_a,
    kind_b,
    alpha_b,
    act_b,
    fixed_b,
    pol_b,
    q_b,
    model_b,
    env,
    init_cum,
    n_max,
    seed,
    counts_a,
    counts_b,
    out_a,
    out_b,
):
    """Run two agents on the identical noise stream, tracking the first slot
    at which their chosen transmit bits differ (-1 if they never do)."""
    p1, r1, p2, r2 = env[0], env[1], env[2], env[3]
    c1, c2, success_reward, miss_reward = env[4], env[5], env[6], env[7]

    u0 = _uniform_at(seed, 0)
    if u0 < init_cum[0]:
        x1, x2, n0 = 0, 0, 0
    elif u0 < init_cum[1]:
        x1, x2, n0 = 0, 1, 0
    elif u0 < init_cum[2]:
        x1, x2, n0 = 1, 0, 0
    else:
        x1, x2, n0 = 1, 1, 1

    oa1, oa2, ea1, ea2 = x1, x2, x1, x2
    ba1, ba2 = 1.0 - x1, 1.0 - x2
    ob1, ob2, eb1, eb2 = x1, x2, x1, x2
    bb1, bb2 = 1.0 - x1, 1.0 - x2
    na = n0
    nb = n0

    life_a = 0
    life_b = 0
    rew_a = 0.0
    rew_b = 0.0
    on_a1 = 0
    on_a2 = 0
    on_b1 = 0
    on_b2 = 0
    diverged_at = np.int64(-1)
    t = 0
    while na < n_max or nb < n_max:
        aa1 = -1
        aa2 = -1
        ab1 = -1
        ab2 = -1
        if na < n_max:
            ai = _decide(kind_a, na, oa1, oa2, ea1, ea2, ba1, ba2, fixed_a, pol_a, q_a)
            aa1 = act_a[ai, 0]
            aa2 = act_a[ai, 1]
        if nb < n_max:
            bi = _decide(kind_b, nb, ob1, ob2, eb1, eb2, bb1, bb2, fixed_b, pol_b, q_b)
            ab1 = act_b[bi, 0]
            ab2 = act_b[bi, 1]
        if (
            diverged_at < 0
            and na < n_max
            and nb < n_max
            and (aa1 != ab1 or aa2 != ab2)
        ):
            diverged_at = t

        u1 = _uniform_at(seed, 1 + 2 * t)
        u2 = _uniform_at(seed, 2 + 2 * t)
        x1 = _channel_step(x1, p1, r1, u1)
        x2 = _channel_step(x2, p2, r2, u2)

        if na < n_max:
            counts_a[na] += 1
            life_a += 1
            on_a1 += aa1
            on_a2 += aa2
            success = (aa1 == 1 and x1 == 0) or (aa2 == 1 and x2 == 0)
            na = 0 if success else na + 1
            rew_a += (success_reward if na == 0 else miss_reward) - (
                aa1 * c1 + aa2 * c2
            )
            see1 = aa1 == 1 or alpha_a == 1
            see2 = aa2 == 1 or alpha_a == 1
            if kind_a == 1:
                oa1, oa2 = x1, x2
            elif kind_a == 2 or kind_a == 3:
                ea1 = x1 if see1 else _knowledge_advance(kind_a, ea1)
                ea2 = x2 if see2 else _knowledge_advance(kind_a, ea2)
            elif kind_a == 4:
                ba1 = (
                    (1.0 - x1)
                    if see1
                    else (1.0 - model_a[0]) * ba1 + model_a[1] * (1.0 - ba1)
                )
                ba2 = (
                    (1.0 - x2)
                    if see2
                    else (1.0 - model_a[2]) * ba2 + model_a[3] * (1.0 - ba2)
                )
        if nb < n_max:
            counts_b[nb] += 1
            life_b += 1
            on_b1 += ab1
            on_b2 += ab2
            success = (ab1 == 1 and x1 == 0) or (ab2 == 1 and x2 == 0)
            nb = 0 if success else nb + 1
            rew_b += (success_reward if nb == 0 else miss_reward) - (
                ab1 * c1 + ab2 * c2
            )
            see1 = ab1 == 1 or alpha_b == 1
            see2 = ab2 == 1 or alpha_b == 1
            if kind_b == 1:
                ob1, ob2 = x1, x2
            elif kind_b == 2 or kind_b == 3:
                eb1 = x1 if see1 else _knowledge_advance(kind_b, eb1)
                eb2 = x2 if see2 else _knowledge_advance(kind_b, eb2)
            elif kind_b == 4:
                bb1 = (
                    (1.0 - x1)
                    if see1
                    else (1.0 - model_b[0]) * bb1 + model_b[1] * (1.0 - bb1)
                )
                bb2 = (
                    (1.0 - x2)
                    if see2
                    else (1.0 - model_b[2]) * bb2 + model_b[3] * (1.0 - bb2)
                )
        t += 1
    out_a[0] = life_a
    out_a[1] = on_a1
    out_a[2] = on_a2
    out_b[0] = life_b
    out_b[1] = on_b1
    out_b[2] = on_b2
    return rew_a, rew_b, diverged_at


@njit(cache=True, parallel=True)
def run_paired_kernel(
    kind_a,
    alpha_a,
    act_a,
    fixed_a,
    pol_a,
    q_a,
    model_a,
    kind_b,
    alpha_b,
    act_b,
    fixed_b,
    pol_b,
    q_b,
    model_b,
    env,
    init_cum,
    n_max,
    seeds,
    lifetimes_a,
    rewards_a,
    n_counts_a,
    on_counts_a,
    lifetimes_b,
    rewards_b,
    n_counts_b,
    on_counts_b,
    diverged,
):
    for i in prange(seeds.shape[0]):
        out_a = np.zeros(3, dtype=np.int64)
        out_b = np.zeros(3, dtype=np.int64)
        rew_a, rew_b, div = _paired_episode(
            kind_a,
            alpha_a,
            act_a,
            fixed_a,
            pol_a,
            q_a,
            model_a,
            kind_b,
            alpha_b,
            act_b,
            fixed_b,
            pol_b,
            q_b,
            model_b,
            env,
            init_cum,
            n_max,
            seeds[i],
            n_counts_a[i],
            n_counts_b[i],
            out_a,
            out_b,
        )
        lifetimes_a[i] = out_a[0]
        on_counts_a[i, 0] = out_a[1]
        on_counts_a[i, 1] = out_a[2]
        rewards_a[i] = rew_a
        lifetimes_b[i] = out_b[0]
        on_counts_b[i, 0] = out_b[1]
        on_counts_b[i, 1] = out_b[2]
        rewards_b[i] = rew_b
        diverged[i] = div
