"""Spin ensembles with pairwise ZZ couplings and longitudinal fields.

The ensemble is a set of N spin-S sites. Sites 0..p-1 form the subsystem of
interest, the rest the environment. All energies are scalar functions of
computational-basis configurations because every term of the Hamiltonian is
diagonal in the common S^z eigenbasis:

    E(s) = - sum_ij J_ij s_i s_j + sum_i h_i s_i

The coupling matrix is plugged into the double sum literally, so each
unordered bond contributes twice: a matrix entry K between two sites means a
physical bond energy 2K. The nearest-neighbor builders store the bare entry
J per ordered pair, which is the convention under which the closed-form
witness expressions of :mod:`spindeph.closedforms` hold.

Spin-z values are stored as twice their physical value (integers), so all
configuration arithmetic is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

DEFAULT_ENUM_CAP = 2**20


class ResourceCapError(RuntimeError):
    """Raised when an enumeration would exceed the configured cap."""


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SpinConfig:
    """Twice-integer spin-z assignment for a group of sites.

    ``twice_values[i]`` is 2*s_i, so half-integer spins stay exact.
    """

    twice_values: tuple

    def __post_init__(self):
        object.__setattr__(self, "twice_values", tuple(int(v) for v in self.twice_values))

    @property
    def site_count(self) -> int:
        return len(self.twice_values)

    @property
    def values(self) -> np.ndarray:
        """Physical spin-z values s_i = twice_values_i / 2."""
        return np.asarray(self.twice_values, dtype=float) / 2.0

    def validate(self, twice_spin: int):
        for v in self.twice_values:
            if abs(v) > twice_spin or (twice_spin - v) % 2 != 0:
                raise ValueError(
                    f"spin value {v}/2 invalid for a spin-{twice_spin}/2 site"
                )


@dataclass(frozen=True)
class EnsembleSpec:
    """N spin-S sites, symmetric coupling matrix, longitudinal fields.

    Sites 0..n_system-1 are the subsystem, the remaining n_total-n_system
    sites the environment. Couplings and fields are in units of a caller
    declared reference energy (hbar = 1).
    """

    n_total: int
    n_system: int
    twice_spin: int
    couplings: np.ndarray
    fields: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_system < self.n_total:
            raise ValueError("need 1 <= n_system < n_total")
        if self.twice_spin < 1:
            raise ValueError("twice_spin must be >= 1")
        j = np.array(self.couplings, dtype=float)
        if j.shape != (self.n_total, self.n_total):
            raise ValueError(f"couplings must be {self.n_total}x{self.n_total}")
        if not np.array_equal(j, j.T):
            raise ValueError("couplings must be symmetric")
        if np.any(np.diag(j) != 0.0):
            raise ValueError("couplings must have zero diagonal")
        h = np.array(self.fields, dtype=float)
        if h.ndim == 0:
            h = np.full(self.n_total, float(h))
        if h.shape != (self.n_total,):
            raise ValueError(f"fields must have length {self.n_total}")
        object.__setattr__(self, "couplings", _as_readonly(j))
        object.__setattr__(self, "fields", _as_readonly(h))

    @property
    def n_env(self) -> int:
        return self.n_total - self.n_system

    @property
    def levels(self) -> int:
        """Local Hilbert-space dimension 2S+1."""
        return self.twice_spin + 1

    @property
    def dim_system(self) -> int:
        return self.levels**self.n_system

    @property
    def dim_env(self) -> int:
        return self.levels**self.n_env

    @property
    def cross_couplings(self) -> np.ndarray:
        """System-to-environment block of the coupling matrix, shape (p, N-p)."""
        return self.couplings[: self.n_system, self.n_system :]


# ---------------------------------------------------------------------------
# coupling models


@dataclass(frozen=True)
class NearestNeighborRing1D:
    """Ring of N sites; matrix entry j between adjacent sites."""

    j: float = 1.0


@dataclass(frozen=True)
class InfiniteRange:
    """All-to-all coupling j/N between distinct sites."""

    j: float = 1.0


@dataclass(frozen=True)
class PowerLawRing1D:
    """Ring with entry j_n(alpha)/r^alpha at chord distance r.

    With ``kac_normalization`` the prefactor is rescaled so that the total
    coupling seen by one site is j (unit mean field); otherwise the prefactor
    is the constant j.
    """

    j: float = 1.0
    alpha: float = 3.0
    kac_normalization: bool = False


@dataclass(frozen=True)
class NearestNeighborTorus2D:
    """side x side square lattice, periodic in both directions, entry j."""

    side: int
    j: float = 1.0


@dataclass(frozen=True)
class ExplicitCoupling:
    """Coupling matrix given verbatim."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_readonly(self.matrix))


CouplingModel = Union[
    NearestNeighborRing1D,
    InfiniteRange,
    PowerLawRing1D,
    NearestNeighborTorus2D,
    ExplicitCoupling,
]


def ring_distance(i: int, j: int, n: int) -> int:
    """Chord distance on a ring of n sites (minimal image)."""
    d = abs(i - j) % n
    return min(d, n - d)


def build_coupling(model: CouplingModel, n_total: int) -> np.ndarray:
    """Return the N x N symmetric coupling matrix for a model.

    Ring models need n_total >= 3 so the two neighbors of a site are
    distinct; the torus needs n_total = side**2.
    """
    if n_total < 2:
        raise ValueError("need at least two sites")
    mat = np.zeros((n_total, n_total))

    if isinstance(model, NearestNeighborRing1D):
        if n_total < 3:
            raise ValueError("ring needs n_total >= 3 for distinct neighbors")
        for i in range(n_total):
            k = (i + 1) % n_total
            mat[i, k] = model.j
            mat[k, i] = model.j
    elif isinstance(model, InfiniteRange):
        mat[:] = model.j / n_total
        np.fill_diagonal(mat, 0.0)
    elif isinstance(model, PowerLawRing1D):
        if n_total < 3:
            raise ValueError("ring needs n_total >= 3 for distinct neighbors")
        prefactor = model.j
        if model.kac_normalization:
            total = sum(ring_distance(0, j, n_total) ** -model.alpha for j in range(1, n_total))
            prefactor = model.j / total
        for i in range(n_total):
            for j in range(i + 1, n_total):
                v = prefactor / ring_distance(i, j, n_total) ** model.alpha
                mat[i, j] = v
                mat[j, i] = v
    elif isinstance(model, NearestNeighborTorus2D):
        m = model.side
        if m < 2:
            raise ValueError("torus side must be >= 2")
        if n_total != m * m:
            raise ValueError(f"torus needs n_total = side**2 = {m * m}, got {n_total}")
        for ix in range(m):
            for iy in range(m):
                a = ix * m + iy
                for bx, by in ((ix, (iy + 1) % m), ((ix + 1) % m, iy)):
                    b = bx * m + by
                    mat[a, b] = model.j
                    mat[b, a] = model.j
    elif isinstance(model, ExplicitCoupling):
        j = np.array(model.matrix, dtype=float)
        if j.shape != (n_total, n_total):
            raise ValueError(f"explicit matrix must be {n_total}x{n_total}")
        if not np.array_equal(j, j.T) or np.any(np.diag(j) != 0.0):
            raise ValueError("explicit matrix must be symmetric with zero diagonal")
        mat = j
    else:
        raise TypeError(f"unknown coupling model {model!r}")
    return mat


def torus_block_ensemble(
    side: int,
    block_side: int,
    j: float = 1.0,
    twice_spin: int = 1,
    fields: float = 0.0,
) -> EnsembleSpec:
    """Torus ensemble with the upper-left block_side x block_side square as system.

    Sites are relabeled so the block occupies indices 0..block_side**2-1, as
    required by the system-first site convention of :class:`EnsembleSpec`.
    """
    if not 1 <= block_side < side:
        raise ValueError("need 1 <= block_side < side")
    n = side * side
    mat = build_coupling(NearestNeighborTorus2D(side=side, j=j), n)
    block = [ix * side + iy for ix in range(block_side) for iy in range(block_side)]
    rest = [k for k in range(n) if k not in set(block)]
    perm = np.array(block + rest)
    mat = mat[np.ix_(perm, perm)]
    return EnsembleSpec(
        n_total=n,
        n_system=block_side * block_side,
        twice_spin=twice_spin,
        couplings=mat,
        fields=np.full(n, float(fields)),
    )


def ensemble_from_model(
    model: CouplingModel,
    n_total: int,
    n_system: int,
    twice_spin: int = 1,
    fields: Union[float, Sequence[float]] = 0.0,
) -> EnsembleSpec:
    h = np.asarray(fields, dtype=float)
    if h.ndim == 0:
        h = np.full(n_total, float(h))
    return EnsembleSpec(
        n_total=n_total,
        n_system=n_system,
        twice_spin=twice_spin,
        couplings=build_coupling(model, n_total),
        fields=h,
    )


# ---------------------------------------------------------------------------
# configuration enumeration

def config_count(site_count: int, twice_spin: int) -> int:
    return (twice_spin + 1) ** site_count


def enumerate_configs(
    site_count: int, twice_spin: int, cap: int = DEFAULT_ENUM_CAP
) -> Iterator[SpinConfig]:
    """Yield all (2S+1)**site_count configurations in lexicographic order.

    Most significant site first, values descending from +S to -S. This
    fixes the basis-index convention used by every matrix in the package.
    """
    total = config_count(site_count, twice_spin)
    if total > cap:
        raise ResourceCapError(
            f"enumeration needs {total} configurations, cap is {cap}"
        )
    levels = twice_spin + 1
    for index in range(total):
        digits = []
        x = index
        for _ in range(site_count):
            digits.append(x % levels)
            x //= levels
        digits.reverse()
        yield SpinConfig(tuple(twice_spin - 2 * d for d in digits))


def config_matrix(site_count: int, twice_spin: int, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """All configurations as an integer array of twice-values.

    Row order matches :func:`enumerate_configs`; shape (levels**site_count,
    site_count).
    """
    total = config_count(site_count, twice_spin)
    if total > cap:
        raise ResourceCapError(
            f"enumeration needs {total} configurations, cap is {cap}"
        )
    levels = twice_spin + 1
    if site_count == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(levels)] * site_count), indexing="ij")
    digits = np.stack([g.reshape(-1) for g in grids], axis=1)
    return (twice_spin - 2 * digits).astype(np.int64)


def config_index(config: SpinConfig, twice_spin: int) -> int:
    """Lexicographic index of a configuration (inverse of enumerate_configs)."""
    levels = twice_spin + 1
    index = 0
    for v in config.twice_values:
        d = (twice_spin - v) // 2
        if not 0 <= d < levels:
            raise ValueError(f"twice-value {v} out of range for twice_spin={twice_spin}")
        index = index * levels + d
    return index


# ---------------------------------------------------------------------------
# scalar Hamiltonians

def _scalar_energy(j_block: np.ndarray, h_block: np.ndarray, twice_values) -> float:
    v = np.asarray(twice_values, dtype=float)
    s = v / 2.0
    return float(-(s @ j_block @ s) + h_block @ s)


def hamiltonian_system(spec: EnsembleSpec, s: SpinConfig) -> float:
    """Energy of the system block: -sum_ij J_ij s_i s_j + sum_i h_i s_i, i,j <= p."""
    if s.site_count != spec.n_system:
        raise ValueError(f"config has {s.site_count} sites, system has {spec.n_system}")
    s.validate(spec.twice_spin)
    p = spec.n_system
    return _scalar_energy(spec.couplings[:p, :p], spec.fields[:p], s.twice_values)


def hamiltonian_env(spec: EnsembleSpec, sigma: SpinConfig) -> float:
    """Energy of the environment block, indices p..N-1, same double-sum form."""
    if sigma.site_count != spec.n_env:
        raise ValueError(f"config has {sigma.site_count} sites, environment has {spec.n_env}")
    sigma.validate(spec.twice_spin)
    p = spec.n_system
    return _scalar_energy(spec.couplings[p:, p:], spec.fields[p:], sigma.twice_values)


def hamiltonian_interaction(spec: EnsembleSpec, s: SpinConfig, sigma: SpinConfig) -> float:
    """Coupling energy -2 sum_{i<=p} sum_{j>p} J_ij s_i sigma_j."""
    if s.site_count != spec.n_system or sigma.site_count != spec.n_env:
        raise ValueError("config lengths must match the system/environment split")
    s.validate(spec.twice_spin)
    sigma.validate(spec.twice_spin)
    sv = np.asarray(s.twice_values, dtype=float) / 2.0
    ev = np.asarray(sigma.twice_values, dtype=float) / 2.0
    return float(-2.0 * (sv @ spec.cross_couplings @ ev))


def hamiltonian_total(spec: EnsembleSpec, full: SpinConfig) -> float:
    """Energy of the full ensemble evaluated on a configuration of all N sites."""
    if full.site_count != spec.n_total:
        raise ValueError(f"config has {full.site_count} sites, ensemble has {spec.n_total}")
    full.validate(spec.twice_spin)
    return _scalar_energy(spec.couplings, spec.fields, full.twice_values)


def system_energies(spec: EnsembleSpec, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """System energies for all configurations, indexed like enumerate_configs."""
    v = config_matrix(spec.n_system, spec.twice_spin, cap=cap).astype(float)
    p = spec.n_system
    j = spec.couplings[:p, :p]
    h = spec.fields[:p]
    return -0.25 * np.einsum("ci,ij,cj->c", v, j, v) + 0.5 * (v @ h)


def env_energies(spec: EnsembleSpec, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Environment energies for all configurations, same indexing."""
    v = config_matrix(spec.n_env, spec.twice_spin, cap=cap).astype(float)
    p = spec.n_system
    j = spec.couplings[p:, p:]
    h = spec.fields[p:]
    return -0.25 * np.einsum("ci,ij,cj->c", v, j, v) + 0.5 * (v @ h)


def total_energies(spec: EnsembleSpec, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Full-ensemble energies over all global configurations.

    The global index is s_index * dim_env + sigma_index, consistent with a
    Kronecker product ordering system (x) environment.
    """
    es = system_energies(spec, cap=cap)
    ee = env_energies(spec, cap=cap)
    vs = config_matrix(spec.n_system, spec.twice_spin, cap=cap).astype(float)
    ve = config_matrix(spec.n_env, spec.twice_spin, cap=cap).astype(float)
    cross = -2.0 * 0.25 * (vs @ spec.cross_couplings @ ve.T)
    return (es[:, None] + ee[None, :] + cross).reshape(-1)


# ---------------------------------------------------------------------------
# JSON loading

_MODEL_BUILDERS = {
    "nn_ring_1d": lambda d: NearestNeighborRing1D(j=float(d.get("J", 1.0))),
    "infinite_range": lambda d: InfiniteRange(j=float(d.get("J", 1.0))),
    "power_law_ring_1d": lambda d: PowerLawRing1D(
        j=float(d.get("J", 1.0)),
        alpha=float(d.get("alpha", 3.0)),
        kac_normalization=bool(d.get("kac_normalization", False)),
    ),
    "nn_torus_2d": lambda d: NearestNeighborTorus2D(
        side=int(d["side"]), j=float(d.get("J", 1.0))
    ),
}


def ensemble_from_dict(doc: dict) -> EnsembleSpec:
    """Build an EnsembleSpec from its JSON document form.

    Expected keys: n_total, n_system, twice_spin, fields (scalar or list),
    and either "model" ({"type": ..., ...}) or "couplings" (N x N list).
    A torus model may carry "system_block_side" to select the corner-block
    system layout.
    """
    n_total = int(doc["n_total"])
    n_system = int(doc["n_system"])
    twice_spin = int(doc.get("twice_spin", 1))
    fields = doc.get("fields", 0.0)

    if "couplings" in doc:
        couplings = np.array(doc["couplings"], dtype=float)
    elif "model" in doc:
        mdoc = dict(doc["model"])
        kind = mdoc.pop("type")
        if kind == "nn_torus_2d" and "system_block_side" in mdoc:
            block = int(mdoc.pop("system_block_side"))
            spec = torus_block_ensemble(
                side=int(mdoc["side"]),
                block_side=block,
                j=float(mdoc.get("J", 1.0)),
                twice_spin=twice_spin,
                fields=float(fields) if np.ndim(fields) == 0 else 0.0,
            )
            if np.ndim(fields) != 0:
                spec = EnsembleSpec(
                    n_total=spec.n_total,
                    n_system=spec.n_system,
                    twice_spin=twice_spin,
                    couplings=spec.couplings,
                    fields=np.asarray(fields, dtype=float),
                )
            if spec.n_system != n_system or spec.n_total != n_total:
                raise ValueError("torus block sizes inconsistent with n_total/n_system")
            return spec
        try:
            builder = _MODEL_BUILDERS[kind]
        except KeyError:
            raise ValueError(f"unknown coupling model type {kind!r}") from None
        couplings = build_coupling(builder(mdoc), n_total)
    else:
        raise ValueError("ensemble document needs either 'model' or 'couplings'")

    h = np.asarray(fields, dtype=float)
    if h.ndim == 0:
        h = np.full(n_total, float(h))
    return EnsembleSpec(
        n_total=n_total,
        n_system=n_system,
        twice_spin=twice_spin,
        couplings=couplings,
        fields=h,
    )


def load_ensemble(path) -> EnsembleSpec:
    with open(path) as fh:
        return ensemble_from_dict(json.load(fh))
