"""Signal-space alignment with network coding for the multi-way relay channel.

User 1 forms a pair with every other user. In the uplink (MAC) slot each
pair's beamformers are chosen so the two partners' signals arrive at the
relay inside one shared d-dimensional subspace, and the K-1 pair subspaces
together fill the whole relay space. The relay zero-forces each pair
subspace, unmixes it, and obtains the clean network-coded sum of the pair's
symbol vectors. In the downlink (BC) slot the relay broadcasts every sum
through its own random precoder; each user zero-forces the precoders it is
not currently reading and peels the messages apart using its own
transmitted symbols as side information.

When the relay has more antennas than a user (N >= M) the surplus relay
antennas are shut down; when the relay dimension is not divisible by K-1,
the channel is extended to a (K-1)-slot block so the streams split evenly.

Plans are power agnostic: they store amplitudes per sqrt(P), so a single
plan serves an entire power sweep.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import DofAllocation, common_only_allocation
from .channel import (
    ChannelSet,
    NetworkConfig,
    extend_channels,
    shutdown_relay_antennas,
    matrix_to_lists,
)
from .linalg import (
    CMatrix,
    null_space_basis,
    numeric_rank,
    orthonormal_columns,
    pseudo_inverse,
    random_gaussian_matrix,
    random_gaussian_vector,
)

logger = logging.getLogger("mrc_dof_lab.ssa_nc")

# Plans whose mixing or user-gain matrices are worse conditioned than this
# are redrawn once and counted as degenerate.
COND_LIMIT = 1e8


class SchemeDesignError(RuntimeError):
    """A channel draw admitted no usable beamformer design."""


@dataclass(frozen=True)
class SchemePlan:
    """Every designed matrix of one scheme instance.

    Pair p (0-based) joins user 0 with user p+1. Per pair: V1[p] and
    Vj[p] are the two transmit beamformers (user_dim x d), F[p] the relay
    zero-forcing basis (relay_dim x d), G[p] = F[p]^H H_1 V1[p] the d x d
    mixing matrix, T[p] the broadcast precoder, and relay_filter[p] =
    G[p]^{-1} F[p]^H the relay's receive filter. Per user u and pair p:
    UZF[u][p] is the downlink zero-forcing basis, user_gain[u][p] the d x d
    effective matrix it sees, rx_filter[u][p] its full receive filter.

    power_scale and bc_scale are transmit amplitudes per sqrt(P) for the
    users and the relay; they fold in the extension factor so the power
    budget is met per original time slot.
    """

    d: int
    effective_N: int
    effective_M: int
    extension_factor: int
    V1: tuple[CMatrix, ...]
    Vj: tuple[CMatrix, ...]
    F: tuple[CMatrix, ...]
    G: tuple[CMatrix, ...]
    T: tuple[CMatrix, ...]
    UZF: tuple[tuple[CMatrix, ...], ...]
    relay_filter: tuple[CMatrix, ...]
    user_gain: tuple[tuple[CMatrix, ...], ...]
    rx_filter: tuple[tuple[CMatrix, ...], ...]
    g_cond: tuple[float, ...]
    user_gain_cond: tuple[tuple[float, ...], ...]
    power_scale: float
    bc_scale: float
    degenerate: bool = False

    @property
    def num_users(self) -> int:
        return len(self.UZF)

    @property
    def num_pairs(self) -> int:
        return len(self.V1)

    @property
    def streams_per_slot(self) -> int:
        """Delivered streams per original slot: K(K-1)d / L, always integral."""
        k = self.num_users
        total = k * (k - 1) * self.d
        assert total % self.extension_factor == 0
        return total // self.extension_factor


@dataclass(frozen=True)
class TransmissionTrace:
    """One simulated channel use of the full two-phase chain.

    decoded[u] lists the recovered symbol vectors at user u, ordered by
    sending user index ascending (user u itself excluded).
    """

    sent: tuple[np.ndarray, ...]
    relay_rx: np.ndarray
    relay_fwd: tuple[np.ndarray, ...]
    user_rx: tuple[np.ndarray, ...]
    decoded: tuple[tuple[np.ndarray, ...], ...]
    noise_on: bool


def other_users(K: int, u: int) -> list[int]:
    """Sending users whose messages user u decodes, ascending."""
    return [v for v in range(K) if v != u]


def extension_plan(K: int, M: int, N: int) -> tuple[int, int, int]:
    """Dimension bookkeeping only: effective relay count before extension,
    extension factor L, and streams d per pair in the (possibly extended)
    block."""
    base = min(N, M)
    if base % (K - 1) == 0:
        return base, 1, base // (K - 1)
    return base, K - 1, base


def prepare_scheme(config: NetworkConfig, channels: ChannelSet) -> tuple[ChannelSet, int]:
    """Shut down surplus relay antennas and extend until the relay
    dimension splits evenly over the K-1 pairs.

    Returns the effective channel set and the per-pair stream count d.
    """
    if channels.extension_factor != 1:
        raise ValueError("prepare_scheme expects unextended channels")
    base, L, d = extension_plan(config.K, config.M, config.N)
    eff = shutdown_relay_antennas(channels, base) if config.N > config.M else channels
    if L > 1:
        eff = extend_channels(eff, L)
    return eff, d


def design_uplink(
    channels: ChannelSet, d: int, rng: np.random.Generator
) -> tuple[tuple[CMatrix, ...], tuple[CMatrix, ...]]:
    """Draw user 0's pair beamformers and align every partner onto them.

    V1[p] is random with orthonormal columns; partner p+1 pre-inverts its
    own uplink so that H_{p+1} Vj[p] = H_0 V1[p] holds exactly (the uplink
    has full row rank after preparation). The K-1 aligned subspaces must
    jointly span the relay space; a rank-deficient draw is resampled once.
    """
    K = channels.num_users
    n_eff = channels.relay_dim
    m_eff = channels.user_dim
    if (K - 1) * d != n_eff:
        raise ValueError("stream count d must satisfy (K-1) d = relay dimension")
    if n_eff > m_eff:
        raise ValueError("uplink design needs relay dimension <= user dimension")
    h0 = channels.uplink[0]
    for attempt in range(2):
        V1 = tuple(orthonormal_columns(random_gaussian_matrix(m_eff, d, rng)) for _ in range(K - 1))
        aligned = np.hstack([h0 @ v for v in V1])
        if numeric_rank(aligned) == n_eff:
            break
        logger.warning("aligned subspaces rank deficient on attempt %d, resampling", attempt)
    else:
        raise SchemeDesignError("aligned pair subspaces stayed rank deficient after resampling")
    Vj = tuple(pseudo_inverse(channels.uplink[p + 1]) @ (h0 @ V1[p]) for p in range(K - 1))
    return V1, Vj


def design_relay_zf(
    channels: ChannelSet, V1: tuple[CMatrix, ...]
) -> tuple[tuple[CMatrix, ...], tuple[CMatrix, ...]]:
    """Per pair: an orthonormal basis F[p] of the directions free of every
    other pair's subspace, and the mixing matrix G[p] it sees.

    F depends only on the first user's uplink and beamformers. G[p] must be
    invertible for the relay to unmix the pair sum.
    """
    h0 = channels.uplink[0]
    n_eff = h0.shape[0]
    aligned = [h0 @ v for v in V1]
    d = V1[0].shape[1]
    F = []
    G = []
    for p in range(len(V1)):
        others = [aligned[i] for i in range(len(V1)) if i != p]
        if others:
            stacked = np.hstack(others).conj().T
        else:
            stacked = np.zeros((0, n_eff), dtype=np.complex128)
        basis = null_space_basis(stacked)
        if basis.shape[1] < d:
            raise SchemeDesignError(f"pair {p + 2}: interference fills the relay space")
        if basis.shape[1] > d:
            # Degenerate surplus: keep the d directions that actually see the pair.
            basis = basis @ orthonormal_columns(basis.conj().T @ aligned[p])
        g = basis.conj().T @ aligned[p]
        if numeric_rank(g) < d:
            raise SchemeDesignError(f"pair {p + 2}: singular mixing matrix")
        F.append(basis)
        G.append(g)
    return tuple(F), tuple(G)


def design_downlink(
    channels: ChannelSet, rng: np.random.Generator
) -> tuple[tuple[CMatrix, ...], tuple[tuple[CMatrix, ...], ...]]:
    """Random orthonormal broadcast precoders T[p] plus, for every user and
    pair, a zero-forcing basis that nulls all other pairs' precoded
    downlink images.

    The basis is aimed inside the null space at the wanted pair's image so
    the effective d x d matrix stays invertible. Needs user dimension at
    least the relay dimension, which preparation guarantees.
    """
    K = channels.num_users
    n_eff = channels.relay_dim
    m_eff = channels.user_dim
    d = n_eff // (K - 1)
    T = tuple(orthonormal_columns(random_gaussian_matrix(n_eff, d, rng)) for _ in range(K - 1))
    UZF = []
    for u in range(K):
        down = channels.downlink[u]
        images = [down @ t for t in T]
        per_user = []
        for p in range(K - 1):
            others = [images[i] for i in range(K - 1) if i != p]
            if others:
                stacked = np.hstack(others).conj().T
            else:
                stacked = np.zeros((0, m_eff), dtype=np.complex128)
            basis = null_space_basis(stacked)
            if basis.shape[1] < d:
                raise SchemeDesignError(
                    f"user {u + 1}: zero-forcing needs user dimension >= relay dimension"
                )
            w = basis @ orthonormal_columns(basis.conj().T @ images[p])
            if w.shape[1] < d or numeric_rank(w.conj().T @ images[p]) < d:
                raise SchemeDesignError(f"user {u + 1}, pair {p + 2}: singular downlink gain")
            per_user.append(w)
        UZF.append(tuple(per_user))
    return T, tuple(UZF)


def _cond(a: CMatrix) -> float:
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")


def _assemble_plan(
    channels: ChannelSet, d: int, V1, Vj, F, G, T, UZF, degenerate: bool
) -> SchemePlan:
    K = channels.num_users
    L = channels.extension_factor
    relay_filter = tuple(np.linalg.solve(g, f.conj().T) for g, f in zip(G, F))
    user_gain = []
    rx_filter = []
    for u in range(K):
        down = channels.downlink[u]
        gains = tuple(UZF[u][p].conj().T @ (down @ T[p]) for p in range(K - 1))
        filters = tuple(
            np.linalg.solve(gains[p], UZF[u][p].conj().T) for p in range(K - 1)
        )
        user_gain.append(gains)
        rx_filter.append(filters)
    # Users share one amplitude so the relay recovers plain symbol sums; the
    # largest per-user budget binds and transmits exactly P per slot.
    budgets = [float(np.linalg.norm(sum(V1)) ** 2)]
    budgets += [float(np.linalg.norm(v) ** 2) for v in Vj]
    power_scale = float(np.sqrt(L / max(budgets)))
    # Relay budget is set against the re-encoded symbol covariance of the
    # forwarded sums: blocks E[w_p w_q^H] = (1 + delta_pq) I_d.
    t_cat = np.hstack(T)
    w_cov = np.kron(np.ones((K - 1, K - 1)) + np.eye(K - 1), np.eye(d))
    sym_power = float(np.real(np.trace(t_cat @ w_cov @ t_cat.conj().T)))
    bc_scale = float(np.sqrt(L / sym_power))
    return SchemePlan(
        d=d,
        effective_N=channels.relay_dim,
        effective_M=channels.user_dim,
        extension_factor=L,
        V1=V1,
        Vj=Vj,
        F=F,
        G=G,
        T=T,
        UZF=UZF,
        relay_filter=relay_filter,
        user_gain=tuple(user_gain),
        rx_filter=tuple(rx_filter),
        g_cond=tuple(_cond(g) for g in G),
        user_gain_cond=tuple(tuple(_cond(g) for g in gains) for gains in user_gain),
        power_scale=power_scale,
        bc_scale=bc_scale,
        degenerate=degenerate,
    )


def design_scheme(
    config: NetworkConfig, channels: ChannelSet, rng: np.random.Generator
) -> tuple[ChannelSet, SchemePlan]:
    """Full design chain: preparation, uplink alignment, relay zero-forcing,
    downlink precoding and user zero-forcing, power scales.

    A plan whose mixing or user-gain matrices exceed the conditioning
    guardrail is redrawn once with fresh randomness and flagged degenerate.
    Returns the effective channels together with the plan.
    """
    eff, d = prepare_scheme(config, channels)
    plan = None
    for attempt in range(2):
        V1, Vj = design_uplink(eff, d, rng)
        F, G = design_relay_zf(eff, V1)
        T, UZF = design_downlink(eff, rng)
        plan = _assemble_plan(eff, d, V1, Vj, F, G, T, UZF, degenerate=attempt > 0)
        worst = max([*plan.g_cond, *(c for row in plan.user_gain_cond for c in row)])
        if worst <= COND_LIMIT:
            break
        logger.warning("plan conditioning %.3e exceeds guardrail, redrawing", worst)
    return eff, plan


def _check_symbols(plan: SchemePlan, symbols) -> None:
    if len(symbols) != plan.num_users:
        raise ValueError(f"need {plan.num_users} symbol vectors, got {len(symbols)}")
    for s in symbols:
        if np.asarray(s).shape != (plan.d,):
            raise ValueError(f"each symbol vector must have length {plan.d}")


def mac_phase(
    plan: SchemePlan,
    channels: ChannelSet,
    symbols,
    P: float,
    rng: np.random.Generator | None = None,
    noise_on: bool = False,
) -> np.ndarray:
    """Uplink slot: every user beamforms its symbol block with amplitude
    power_scale * sqrt(P); the relay observes the superposition plus
    unit-variance noise when enabled."""
    _check_symbols(plan, symbols)
    a = plan.power_scale * np.sqrt(P)
    x = [a * (sum(plan.V1) @ np.asarray(symbols[0]))]
    x += [a * (plan.Vj[u - 1] @ np.asarray(symbols[u])) for u in range(1, plan.num_users)]
    y_r = sum(channels.uplink[u] @ x[u] for u in range(plan.num_users))
    if noise_on:
        y_r = y_r + random_gaussian_vector(plan.effective_N, rng)
    return y_r


def relay_process(plan: SchemePlan, y_r: np.ndarray, P: float) -> tuple[np.ndarray, ...]:
    """Zero-force, unmix, and rescale: per pair the relay recovers the
    network-coded sum of the two partners' symbol vectors (exactly, when
    noiseless)."""
    a = plan.power_scale * np.sqrt(P)
    return tuple(rf @ y_r / a for rf in plan.relay_filter)


def bc_phase(
    plan: SchemePlan,
    channels: ChannelSet,
    w,
    P: float,
    rng: np.random.Generator | None = None,
    noise_on: bool = False,
) -> tuple[np.ndarray, ...]:
    """Downlink slot: the relay broadcasts every pair sum through its
    precoder with amplitude bc_scale * sqrt(P)."""
    if len(w) != plan.num_pairs:
        raise ValueError(f"need {plan.num_pairs} forwarded vectors")
    for v in w:
        if np.asarray(v).shape != (plan.d,):
            raise ValueError(f"each forwarded vector must have length {plan.d}")
    b = plan.bc_scale * np.sqrt(P)
    x_r = b * sum(plan.T[p] @ np.asarray(w[p]) for p in range(plan.num_pairs))
    out = []
    for u in range(plan.num_users):
        y = channels.downlink[u] @ x_r
        if noise_on:
            y = y + random_gaussian_vector(plan.effective_M, rng)
        out.append(y)
    return tuple(out)


def user_decode(
    plan: SchemePlan, y_u: np.ndarray, u: int, own_symbols: np.ndarray, P: float
) -> tuple[np.ndarray, ...]:
    """Recover the other users' symbol vectors at user u.

    The user zero-forces each pair, then peels: user 0 subtracts its own
    symbols from every sum; user u >= 1 first recovers user 0's symbols
    from its own pair, then subtracts them from the remaining sums.
    Returned in sending-user order ascending.
    """
    if not 0 <= u < plan.num_users:
        raise ValueError("user index out of range")
    b = plan.bc_scale * np.sqrt(P)
    what = [plan.rx_filter[u][p] @ y_u / b for p in range(plan.num_pairs)]
    own = np.asarray(own_symbols)
    decoded: dict[int, np.ndarray] = {}
    if u == 0:
        for p in range(plan.num_pairs):
            decoded[p + 1] = what[p] - own
    else:
        s0 = what[u - 1] - own
        decoded[0] = s0
        for p in range(plan.num_pairs):
            if p + 1 != u:
                decoded[p + 1] = what[p] - s0
    return tuple(decoded[v] for v in other_users(plan.num_users, u))


def run_round(
    plan: SchemePlan,
    channels: ChannelSet,
    P: float,
    rng: np.random.Generator,
    noise_on: bool,
) -> TransmissionTrace:
    """Draw fresh unit-power symbols and push them through both phases and
    every user's decoder."""
    K = plan.num_users
    sent = tuple(random_gaussian_vector(plan.d, rng) for _ in range(K))
    y_r = mac_phase(plan, channels, sent, P, rng, noise_on)
    w = relay_process(plan, y_r, P)
    user_rx = bc_phase(plan, channels, w, P, rng, noise_on)
    decoded = tuple(user_decode(plan, user_rx[u], u, sent[u], P) for u in range(K))
    return TransmissionTrace(
        sent=sent,
        relay_rx=y_r,
        relay_fwd=w,
        user_rx=user_rx,
        decoded=decoded,
        noise_on=noise_on,
    )


def build_allocation(plan: SchemePlan, K: int) -> DofAllocation:
    """Per-slot stream allocation the scheme realizes: d/L common streams
    per user, nothing private."""
    if K != plan.num_users:
        raise ValueError("K does not match the plan")
    per_user = Fraction(plan.d, plan.extension_factor)
    if per_user.denominator == 1:
        per_user = int(per_user)
    return common_only_allocation(K, per_user)


def plan_to_json_dict(plan: SchemePlan) -> dict:
    """JSON encoding of every designed matrix, for dumping a specific draw."""
    return {
        "d": plan.d,
        "effective_N": plan.effective_N,
        "effective_M": plan.effective_M,
        "extension_factor": plan.extension_factor,
        "power_scale": plan.power_scale,
        "bc_scale": plan.bc_scale,
        "degenerate": plan.degenerate,
        "V1": [matrix_to_lists(m) for m in plan.V1],
        "Vj": [matrix_to_lists(m) for m in plan.Vj],
        "F": [matrix_to_lists(m) for m in plan.F],
        "G": [matrix_to_lists(m) for m in plan.G],
        "T": [matrix_to_lists(m) for m in plan.T],
        "UZF": [[matrix_to_lists(m) for m in row] for row in plan.UZF],
        "g_cond": list(plan.g_cond),
        "user_gain_cond": [list(row) for row in plan.user_gain_cond],
    }


def save_plan(plan: SchemePlan, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(plan_to_json_dict(plan), fh, sort_keys=True, indent=2)
        fh.write("\n")


__all__ = [
    "COND_LIMIT",
    "SchemeDesignError",
    "SchemePlan",
    "TransmissionTrace",
    "other_users",
    "extension_plan",
    "prepare_scheme",
    "design_uplink",
    "design_relay_zf",
    "design_downlink",
    "design_scheme",
    "mac_phase",
    "relay_process",
    "bc_phase",
    "user_decode",
    "run_round",
    "build_allocation",
    "plan_to_json_dict",
    "save_plan",
]
