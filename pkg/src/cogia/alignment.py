"""Precoder, correction and combiner construction for the two-cell network.

Transmit side
-------------
* Primary precoders: the first ``Z = (M_P - N_P)^+`` columns of V_P1
  (resp. V_P2) are taken from an orthonormal null-space basis of the
  other primary user's channel, so those streams cause no cross-user
  interference at all.  Any remaining columns are isotropic random unit
  vectors.
* Correction matrices: for each primary stream beyond the first Z, the
  secondary BS transmits a correction vector that cancels the stream at
  the non-intended primary user.  The correction for stream l of P1 is
  the minimum-norm solution of ``Hp_P2 @ vbar = -H_P2 @ v_l``, which is
  exactly the right-pseudo-inverse form of the effective-channel
  expression the receive equation produces.
* Secondary precoders: stream g of S_j is forced into the null space of
  the other secondary user's full channel stacked with the first d_Sj
  rows of its own channel, excluding row g.  Within that null space the
  column is the normalized projection of the user's own g-th channel
  row, which maximizes the surviving gain while meeting every
  zero-forcing constraint.

Receive side
------------
* Primary combiners: per stream, a unit vector orthogonal to every other
  desired effective column and to all secondary-stream interference
  columns; within the remaining space the combiner is the normalized
  projection of the stream's own effective column (degenerating to a
  matched filter when there is nothing to avoid).  Combiner columns of a
  multi-stream user are individually unit-norm but generally not
  mutually orthogonal: the zero-forcing constraints pin their
  directions, and the gain-maximizing choice lies inside the span of the
  desired columns.
* Secondary combiners: the alignment above lands stream g of S_j on
  receive coordinate g, so the combiner is simply the selector of the
  first d_Sj receive coordinates and the effective secondary channel is
  diagonal.

The secondary data streams are dirty-paper encoded against the known
primary-induced interference; the model here is ideal presubtraction, so
secondary decoding sees only the diagonal effective channel plus noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannel, InfeasibleAlloc, NoComplement
from .numerics import DEFAULT_POLICY, TolerancePolicy, min_norm_right_solve, null_space_basis
from .scenario import (
    PRECODER_STREAM_P1,
    PRECODER_STREAM_P2,
    ChannelSet,
    StreamAlloc,
    _SubstreamFactory,
)

__all__ = [
    "PrecoderReceiverSet",
    "EffectiveChannels",
    "InterferenceReport",
    "build_primary_precoders",
    "build_corrections",
    "build_secondary_precoders",
    "build_primary_receivers",
    "build_secondary_receivers",
    "build_all",
    "effective_channels",
    "interference_report",
]


@dataclass(frozen=True)
class PrecoderReceiverSet:
    """All transmit precoders, corrections and receive combiners.

    Shapes: V_Pi is M_P x d_Pi, Vbar_Pi is M_S x d_Pi (columns 1..Z are
    zero), V_Sj is M_S x d_Sj, U_Pi is N_P x d_Pi, U_Sj is N_S x d_Sj.
    """

    V_P1: np.ndarray
    V_P2: np.ndarray
    Vbar_P1: np.ndarray
    Vbar_P2: np.ndarray
    V_S1: np.ndarray
    V_S2: np.ndarray
    U_P1: np.ndarray
    U_P2: np.ndarray
    U_S1: np.ndarray
    U_S2: np.ndarray
    Z: int


@dataclass(frozen=True)
class EffectiveChannels:
    """End-to-end channels seen by each stream after the construction.

    G_Pi column l is the vector multiplying the l-th data symbol of P_i
    at its receiver (direct channel plus correction path).  D_Sj is the
    post-combining secondary channel, diagonal by construction.
    """

    G_P1: np.ndarray
    G_P2: np.ndarray
    D_S1: np.ndarray
    D_S2: np.ndarray


@dataclass(frozen=True)
class InterferenceReport:
    """Relative residual interference norms, one entry per leakage path.

    Every entry is a Frobenius norm divided by the Frobenius norm of the
    channel it travels through, so a perfect construction reports values
    at numerical-noise level regardless of channel scale.
    """

    entries: dict[str, float]
    worst_case: float


def _unit_columns(M: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(M, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateChannel("drawn precoder column has zero norm")
    return M / norms


def build_primary_precoders(
    ch: ChannelSet,
    d: StreamAlloc,
    seed: int,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> tuple[np.ndarray, np.ndarray]:
    """Primary precoders V_P1, V_P2.

    First min(Z, d_Pi) columns from the null space of the other user's
    channel; the rest are random isotropic unit columns from the seed's
    reserved substreams.
    """
    dims = ch.dims
    Z = dims.Z
    factory = _SubstreamFactory(seed)

    def one_user(d_i: int, avoid_channel: np.ndarray, stream_id: int, name: str) -> np.ndarray:
        if d_i > dims.M_P:
            raise InfeasibleAlloc(f"{name} = {d_i} exceeds M_P = {dims.M_P}")
        if d_i > Z and dims.M_S < dims.N_P:
            raise InfeasibleAlloc(
                f"{name} = {d_i} > Z = {Z} needs corrections, but M_S = {dims.M_S} < N_P = {dims.N_P}"
            )
        if d_i == 0:
            return np.zeros((dims.M_P, 0))
        n_null = min(Z, d_i)
        parts = []
        if n_null:
            basis = null_space_basis(avoid_channel, pol)
            if basis.shape[1] < n_null:
                raise DegenerateChannel(
                    f"null space for {name} has {basis.shape[1]} < {n_null} dimensions"
                )
            parts.append(basis[:, :n_null])
        if d_i > n_null:
            raw = factory.stream(stream_id).standard_normal((dims.M_P, d_i - n_null))
            parts.append(_unit_columns(raw))
        V = np.hstack(parts)
        if d_i > 1:
            s = np.linalg.svd(V, compute_uv=False)
            if s[-1] <= pol.rank_tol * s[0]:
                raise DegenerateChannel(f"columns of V_{name[2:]} are not linearly independent")
        return V

    V_P1 = one_user(d.d_P1, ch.H_P2, PRECODER_STREAM_P1, "d_P1")
    V_P2 = one_user(d.d_P2, ch.H_P1, PRECODER_STREAM_P2, "d_P2")
    return V_P1, V_P2


def build_corrections(
    ch: ChannelSet,
    V_P1: np.ndarray,
    V_P2: np.ndarray,
    Z: int,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> tuple[np.ndarray, np.ndarray]:
    """Secondary correction matrices Vbar_P1, Vbar_P2.

    Column l is zero for l <= Z; beyond that it solves
    ``Hp_other @ vbar_l = -H_other @ v_l`` (minimum-norm), so the stream
    vanishes at the non-intended primary user.  Raises RankDeficient when
    the needed right pseudo-inverse does not exist.
    """
    M_S = ch.dims.M_S

    def corrections(V: np.ndarray, H_other: np.ndarray, Hp_other: np.ndarray) -> np.ndarray:
        d_i = V.shape[1]
        Vbar = np.zeros((M_S, d_i))
        if d_i > Z:
            rhs = -(H_other @ V[:, Z:])
            Vbar[:, Z:] = min_norm_right_solve(Hp_other, rhs, pol)
        return Vbar

    Vbar_P1 = corrections(V_P1, ch.H_P2, ch.Hp_P2)
    Vbar_P2 = corrections(V_P2, ch.H_P1, ch.Hp_P1)
    return Vbar_P1, Vbar_P2


def build_secondary_precoders(
    ch: ChannelSet,
    d: StreamAlloc,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> tuple[np.ndarray, np.ndarray]:
    """Secondary precoders V_S1, V_S2 implementing the stacked-space alignment.

    Stream g of S_j is orthogonal to the other secondary user's whole
    channel and to rows g' != g among the first d_Sj rows of its own
    channel, while keeping a nonzero gain on its own row g.
    """
    dims = ch.dims
    M_S, N_S = dims.M_S, dims.N_S
    headroom = M_S - N_S

    for name, d_j in (("d_S1", d.d_S1), ("d_S2", d.d_S2)):
        if d_j == 0:
            continue
        if d_j > headroom:
            raise InfeasibleAlloc(f"{name} <= M_S - N_S violated: {d_j} > {M_S} - {N_S}")
        if d_j > N_S:
            raise InfeasibleAlloc(f"{name} <= N_S violated: {d_j} > {N_S}")

    def one_user(H_own: np.ndarray, H_other: np.ndarray, d_j: int, user: str) -> np.ndarray:
        if d_j == 0:
            return np.zeros((M_S, 0))
        cols = []
        own_rows = H_own[:d_j]
        for g in range(d_j):
            avoid = np.vstack([np.delete(own_rows, g, axis=0), H_other])
            basis = null_space_basis(avoid, pol)
            # cols(avoid) = M_S > rows(avoid) here, so the basis is never empty
            h_g = H_own[g]
            v = basis @ (basis.T @ h_g)
            gain = np.linalg.norm(v)
            if gain <= pol.rank_tol * np.linalg.norm(h_g):
                raise DegenerateChannel(
                    f"stream {g + 1} of {user} is orthogonal to its own channel row"
                )
            cols.append(v / gain)
        return np.column_stack(cols)

    V_S1 = one_user(ch.H_S1, ch.H_S2, d.d_S1, "S1")
    V_S2 = one_user(ch.H_S2, ch.H_S1, d.d_S2, "S2")
    return V_S1, V_S2


def _primary_effective(
    ch: ChannelSet,
    V_P1: np.ndarray,
    V_P2: np.ndarray,
    Vbar_P1: np.ndarray,
    Vbar_P2: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    G_P1 = ch.H_P1 @ V_P1 + ch.Hp_P1 @ Vbar_P1
    G_P2 = ch.H_P2 @ V_P2 + ch.Hp_P2 @ Vbar_P2
    return G_P1, G_P2


def build_primary_receivers(
    ch: ChannelSet,
    V_P1: np.ndarray,
    V_P2: np.ndarray,
    Vbar_P1: np.ndarray,
    Vbar_P2: np.ndarray,
    V_S1: np.ndarray,
    V_S2: np.ndarray,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> tuple[np.ndarray, np.ndarray]:
    """Zero-forcing combiners U_P1, U_P2.

    Per stream the avoid set holds the user's other desired effective
    columns plus every secondary interference column; the combiner is the
    normalized projection of the stream's own effective column onto the
    orthogonal complement of that set, which maximizes the surviving
    stream gain among all valid zero-forcing directions.
    """
    G_P1, G_P2 = _primary_effective(ch, V_P1, V_P2, Vbar_P1, Vbar_P2)

    def one_user(G: np.ndarray, Hp_own: np.ndarray, user: str) -> np.ndarray:
        N_P, d_i = G.shape
        if d_i == 0:
            return np.zeros((N_P, 0))
        inter = (Hp_own @ np.hstack([V_S1, V_S2])).T  # interference rows to avoid
        cols: list[np.ndarray] = []
        for l in range(d_i):
            base = np.vstack([np.delete(G, l, axis=1).T, inter])
            basis = null_space_basis(base, pol)
            if basis.shape[1] == 0:
                raise NoComplement(
                    f"avoid space for stream {l + 1} of {user} fills the {N_P}-dim receive space"
                )
            g = G[:, l]
            u = basis @ (basis.T @ g)
            gain = np.linalg.norm(u)
            if gain <= pol.rank_tol * np.linalg.norm(g):
                raise DegenerateChannel(
                    f"stream {l + 1} of {user} has no component in its interference-free space"
                )
            cols.append(u / gain)
        return np.column_stack(cols)

    U_P1 = one_user(G_P1, ch.Hp_P1, "P1")
    U_P2 = one_user(G_P2, ch.Hp_P2, "P2")
    return U_P1, U_P2


def build_secondary_receivers(n_rx: int, d: StreamAlloc) -> tuple[np.ndarray, np.ndarray]:
    """Selector combiners U_S1, U_S2: the first d_Sj receive coordinates."""
    for name, d_j in (("d_S1", d.d_S1), ("d_S2", d.d_S2)):
        if d_j > n_rx:
            raise InfeasibleAlloc(f"{name} <= N_S violated: {d_j} > {n_rx}")
    eye = np.eye(n_rx)
    return eye[:, : d.d_S1].copy(), eye[:, : d.d_S2].copy()


def build_all(
    ch: ChannelSet,
    d: StreamAlloc,
    seed: int,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> PrecoderReceiverSet:
    """Run the full construction and return the frozen precoder/receiver set."""
    Z = ch.dims.Z
    V_P1, V_P2 = build_primary_precoders(ch, d, seed, pol)
    Vbar_P1, Vbar_P2 = build_corrections(ch, V_P1, V_P2, Z, pol)
    V_S1, V_S2 = build_secondary_precoders(ch, d, pol)
    U_P1, U_P2 = build_primary_receivers(ch, V_P1, V_P2, Vbar_P1, Vbar_P2, V_S1, V_S2, pol)
    U_S1, U_S2 = build_secondary_receivers(ch.dims.N_S, d)
    arrays = dict(
        V_P1=V_P1, V_P2=V_P2, Vbar_P1=Vbar_P1, Vbar_P2=Vbar_P2,
        V_S1=V_S1, V_S2=V_S2, U_P1=U_P1, U_P2=U_P2, U_S1=U_S1, U_S2=U_S2,
    )
    for a in arrays.values():
        a.flags.writeable = False
    return PrecoderReceiverSet(Z=Z, **arrays)


def effective_channels(ch: ChannelSet, prs: PrecoderReceiverSet) -> EffectiveChannels:
    """End-to-end effective channels for all four users."""
    G_P1, G_P2 = _primary_effective(ch, prs.V_P1, prs.V_P2, prs.Vbar_P1, prs.Vbar_P2)
    D_S1 = prs.U_S1.T @ ch.H_S1 @ prs.V_S1
    D_S2 = prs.U_S2.T @ ch.H_S2 @ prs.V_S2
    return EffectiveChannels(G_P1=G_P1, G_P2=G_P2, D_S1=D_S1, D_S2=D_S2)


def _rel(residual: np.ndarray, reference: np.ndarray) -> float:
    r = float(np.linalg.norm(residual))
    h = float(np.linalg.norm(reference))
    return r / h if h > 0.0 else r


def _offdiag(M: np.ndarray) -> np.ndarray:
    if M.size == 0:
        return M
    out = M.copy()
    k = min(M.shape)
    out[np.arange(k), np.arange(k)] = 0.0
    return out


def interference_report(
    ch: ChannelSet,
    prs: PrecoderReceiverSet,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> InterferenceReport:
    """Measure every residual interference path of the construction.

    Categories: primary intra-cell leakage after corrections, secondary
    intra-cell leakage, post-combining inter-cell leakage at the primary
    users, and post-combining cross-stream leakage among each user's own
    desired streams.
    """
    eff = effective_channels(ch, prs)
    V_S = np.hstack([prs.V_S1, prs.V_S2])
    entries = {
        "pcell_intra_at_P2": _rel(ch.H_P2 @ prs.V_P1 + ch.Hp_P2 @ prs.Vbar_P1, ch.H_P2),
        "pcell_intra_at_P1": _rel(ch.H_P1 @ prs.V_P2 + ch.Hp_P1 @ prs.Vbar_P2, ch.H_P1),
        "scell_intra_at_S2": _rel(ch.H_S2 @ prs.V_S1, ch.H_S2),
        "scell_intra_at_S1": _rel(ch.H_S1 @ prs.V_S2, ch.H_S1),
        "intercell_post_at_P1": _rel(prs.U_P1.T @ (ch.Hp_P1 @ V_S), ch.Hp_P1),
        "intercell_post_at_P2": _rel(prs.U_P2.T @ (ch.Hp_P2 @ V_S), ch.Hp_P2),
        "cross_stream_at_P1": _rel(_offdiag(prs.U_P1.T @ eff.G_P1), ch.H_P1),
        "cross_stream_at_P2": _rel(_offdiag(prs.U_P2.T @ eff.G_P2), ch.H_P2),
        "cross_stream_at_S1": _rel(_offdiag(eff.D_S1), ch.H_S1),
        "cross_stream_at_S2": _rel(_offdiag(eff.D_S2), ch.H_S2),
    }
    worst = max(entries.values(), default=0.0)
    return InterferenceReport(entries=entries, worst_case=worst)
