"""Uplink OFDMA transmitter: allocation, subcarrier mapping, IDFT, cyclic extension."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import as_generator, idft, is_power_of_two

ALLOCATION_SCHEMES = ("generalized", "interleaved", "blocked")


@dataclass(frozen=True)
class OfdmaConfig:
    """Dimensional parameters of one uplink OFDMA symbol.

    Parameters
    ----------
    n_subcarriers : int
        DFT size ``N`` (power of two).
    n_users : int
        Number of users ``K``.
    n_cp, n_cs : int
        Cyclic prefix and suffix lengths in samples.
    n_window : int
        Total raised-cosine roll-off ``N_w`` (``N_w/2`` excess samples per side).
        Zero disables receiver windowing for this configuration.
    active : tuple of int, optional
        Used subcarriers. Defaults to all ``N`` bins.
    """

    n_subcarriers: int
    n_users: int
    n_cp: int
    n_cs: int
    n_window: int = 0
    active: tuple = field(default=None)

    def __post_init__(self):
        n = self.n_subcarriers
        if not is_power_of_two(n):
            raise ValueError(f"number of subcarriers must be a power of two, got {n}")
        if self.n_users < 1:
            raise ValueError("need at least one user")
        if self.n_cp < 0 or self.n_cs < 0:
            raise ValueError("cyclic prefix/suffix lengths must be nonnegative")
        if self.n_cp > n or self.n_cs > n:
            raise ValueError("cyclic prefix/suffix cannot exceed the symbol length")
        if self.n_window % 2 or not 0 <= self.n_window < n:
            raise ValueError(f"window length must be even and in [0, N), got {self.n_window}")
        if self.n_guard < 0:
            raise ValueError(
                f"cyclic extension too short for the window: N_CP + N_CS = "
                f"{self.n_cp + self.n_cs} < N_w = {self.n_window}"
            )
        if self.active is None:
            object.__setattr__(self, "active", tuple(range(n)))
        else:
            act = tuple(sorted(int(a) for a in self.active))
            if len(set(act)) != len(act) or act[0] < 0 or act[-1] >= n:
                raise ValueError("active subcarriers must be distinct indices in [0, N)")
            object.__setattr__(self, "active", act)
        if len(self.active) % self.n_users:
            raise ValueError(
                f"{len(self.active)} active subcarriers cannot be split evenly over "
                f"{self.n_users} users"
            )

    @property
    def n_per_user(self) -> int:
        return len(self.active) // self.n_users

    @property
    def n_total(self) -> int:
        """Extended symbol length ``N_T = N + N_CP + N_CS``."""
        return self.n_subcarriers + self.n_cp + self.n_cs

    @property
    def n_guard(self) -> int:
        """Samples discarded ahead of the windowed receiver, ``N_CP + N_CS - N_w``."""
        return self.n_cp + self.n_cs - self.n_window

    @property
    def active_bins(self) -> np.ndarray:
        return np.asarray(self.active, dtype=np.intp)

    @property
    def full_occupancy(self) -> bool:
        return len(self.active) == self.n_subcarriers

    def max_channel_length(self, windowed: bool = True) -> int:
        """Longest channel that keeps the retained samples ISI-free."""
        start = self.n_guard if windowed and self.n_window else self.n_cp
        return start + 1

    def with_window(self, n_window: int) -> "OfdmaConfig":
        return OfdmaConfig(self.n_subcarriers, self.n_users, self.n_cp, self.n_cs,
                           n_window, self.active)


@dataclass(frozen=True)
class AllocationMap:
    """Disjoint subcarrier sets, one per user, in ascending bin order."""

    scheme: str
    sets: tuple
    n_subcarriers: int

    def __post_init__(self):
        sets = tuple(np.asarray(sorted(s), dtype=np.intp) for s in self.sets)
        for s in sets:
            s.setflags(write=False)
        object.__setattr__(self, "sets", sets)
        flat = np.concatenate(sets) if sets else np.empty(0, np.intp)
        if len(np.unique(flat)) != len(flat):
            raise ValueError("subcarrier sets overlap")
        if len({len(s) for s in sets}) > 1:
            raise ValueError("all users must hold the same number of subcarriers")
        if flat.size and (flat.min() < 0 or flat.max() >= self.n_subcarriers):
            raise ValueError("subcarrier index out of range")

    @property
    def n_users(self) -> int:
        return len(self.sets)

    @property
    def active(self) -> np.ndarray:
        return np.sort(np.concatenate(self.sets))

    def owner(self) -> np.ndarray:
        """User index per subcarrier; ``-1`` on unused bins."""
        own = np.full(self.n_subcarriers, -1, dtype=np.intp)
        for i, s in enumerate(self.sets):
            own[s] = i
        return own


def build_allocation(scheme: str, cfg: OfdmaConfig, rng=None) -> AllocationMap:
    """Partition the active subcarriers of ``cfg`` among its users.

    ``generalized`` draws a uniformly random partition (needs ``rng``),
    ``interleaved`` deals active bins round-robin, ``blocked`` cuts contiguous
    chunks.
    """
    if scheme not in ALLOCATION_SCHEMES:
        raise ValueError(f"unknown allocation scheme {scheme!r}")
    active = cfg.active_bins
    k = cfg.n_users
    if len(active) % k:
        raise ValueError("active subcarriers not divisible by the number of users")
    if scheme == "interleaved":
        sets = [active[i::k] for i in range(k)]
    elif scheme == "blocked":
        sets = np.split(active, k)
    else:
        if rng is None:
            raise ValueError("generalized allocation needs a random stream")
        perm = as_generator(rng).permutation(active)
        sets = np.split(perm, k)
    return AllocationMap(scheme, tuple(sets), cfg.n_subcarriers)


def map_subcarriers(d, alloc: AllocationMap, user: int) -> np.ndarray:
    """Place one user's symbols (last axis) on its subcarriers; zeros elsewhere."""
    if not 0 <= user < alloc.n_users:
        raise IndexError(f"user {user} out of range for {alloc.n_users} users")
    d = np.asarray(d, dtype=complex)
    idx = alloc.sets[user]
    if d.shape[-1] != len(idx):
        raise ValueError(f"expected {len(idx)} symbols, got {d.shape[-1]}")
    out = np.zeros(d.shape[:-1] + (alloc.n_subcarriers,), dtype=complex)
    out[..., idx] = d
    return out


def compose_frame(per_user, alloc: AllocationMap) -> np.ndarray:
    """Composite frequency vector holding every user's symbols.

    ``per_user`` has shape ``(..., K, L)``.
    """
    per_user = np.asarray(per_user, dtype=complex)
    out = np.zeros(per_user.shape[:-2] + (alloc.n_subcarriers,), dtype=complex)
    for i, idx in enumerate(alloc.sets):
        out[..., idx] = per_user[..., i, :]
    return out


def synthesize_time_symbol(s_f) -> np.ndarray:
    return idft(s_f)


def cyclic_extend(s_t, n_cp: int, n_cs: int) -> np.ndarray:
    """Prepend the last ``n_cp`` and append the first ``n_cs`` samples (last axis)."""
    s_t = np.asarray(s_t)
    n = s_t.shape[-1]
    if not (0 <= n_cp <= n and 0 <= n_cs <= n):
        raise ValueError(f"cyclic extension ({n_cp}, {n_cs}) exceeds symbol length {n}")
    idx = np.arange(-n_cp, n + n_cs) % n
    return s_t[..., idx]
