"""Finite distributions, learning scenarios and exact generalization errors.

Every expectation in this package is computed by exhaustive enumeration over
finite alphabets. A learner is stored as a dense kernel array whose leading
axes index the ordered training sample, followed by an auxiliary axis ``R``
(size 1 when absent) and a final hypothesis axis ``W``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import EnumerationGuardError, InvariantError, UnconditionableError
from .transport import MetricSpace

ENUMERATION_GUARD = 10 ** 6
PROB_TOL = 1e-12
LIPSCHITZ_TOL = 1e-12


def _check_probs(probs: np.ndarray, what: str) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if not np.all(np.isfinite(probs)):
        raise InvariantError(f"{what}: probabilities must be finite")
    if np.any(probs < 0):
        raise InvariantError(f"{what}: probabilities must be nonnegative")
    total = probs.sum()
    if abs(total - 1.0) > PROB_TOL * max(1, probs.size) ** 0.5 + PROB_TOL:
        raise InvariantError(f"{what}: probabilities sum to {total!r}, not 1")
    return probs


class FiniteDistribution:
    """A probability table over a finite (possibly product) support.

    A one-dimensional law is built with ``FiniteDistribution(support, probs)``.
    Joint laws over several coordinates use :meth:`over` with one support per
    axis; ``probs`` then has one array axis per coordinate.
    """

    __slots__ = ("supports", "probs")

    def __init__(self, support: Sequence[Hashable], probs):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1:
            raise InvariantError("use FiniteDistribution.over for multi-axis tables")
        self._init((tuple(support),), probs)

    @classmethod
    def over(cls, supports: Sequence[Sequence[Hashable]], probs) -> "FiniteDistribution":
        obj = cls.__new__(cls)
        obj._init(tuple(tuple(s) for s in supports), np.asarray(probs, dtype=float))
        return obj

    def _init(self, supports, probs):
        if probs.shape != tuple(len(s) for s in supports):
            raise InvariantError(
                f"table shape {probs.shape} does not match support sizes {[len(s) for s in supports]}"
            )
        for s in supports:
            if len(set(s)) != len(s):
                raise InvariantError("support ids must be unique")
        probs = _check_probs(probs, "FiniteDistribution").copy()
        probs.setflags(write=False)
        object.__setattr__(self, "supports", supports)
        object.__setattr__(self, "probs", probs)

    def __setattr__(self, name, value):
        raise AttributeError("FiniteDistribution is immutable")

    @property
    def support(self) -> tuple:
        if len(self.supports) != 1:
            raise AttributeError("support is only defined for one-axis distributions")
        return self.supports[0]

    @property
    def ndim(self) -> int:
        return len(self.supports)

    def prob(self, *symbols) -> float:
        idx = tuple(s.index(x) for s, x in zip(self.supports, symbols))
        return float(self.probs[idx])

    def __repr__(self):
        if self.ndim == 1:
            return f"FiniteDistribution({self.support!r}, {self.probs.tolist()!r})"
        return f"FiniteDistribution.over({self.supports!r}, ...)"


def point_mass(support: Sequence[Hashable], at: Hashable) -> FiniteDistribution:
    support = tuple(support)
    probs = np.zeros(len(support))
    probs[support.index(at)] = 1.0
    return FiniteDistribution(support, probs)


def product(*dists: FiniteDistribution) -> FiniteDistribution:
    """Independent joint law of the given distributions."""
    supports = []
    table = np.ones(())
    for d in dists:
        supports.extend(d.supports)
        table = np.multiply.outer(table, d.probs)
    return FiniteDistribution.over(supports, table)


def marginal(joint: FiniteDistribution, axes: Sequence[int]) -> FiniteDistribution:
    """Sum out ``axes`` of a joint table."""
    axes = tuple(sorted(set(int(a) for a in axes)))
    for a in axes:
        if not 0 <= a < joint.ndim:
            raise IndexError(f"axis {a} out of range for a {joint.ndim}-axis distribution")
    if len(axes) == joint.ndim:
        raise IndexError("cannot sum out every axis")
    keep = [s for i, s in enumerate(joint.supports) if i not in axes]
    return FiniteDistribution.over(keep, joint.probs.sum(axis=axes))


def condition(joint: FiniteDistribution, evidence: Mapping[int, Hashable]) -> FiniteDistribution:
    """Law of the remaining coordinates given ``{axis: symbol}`` evidence."""
    index: list = [slice(None)] * joint.ndim
    for axis, symbol in evidence.items():
        if not 0 <= axis < joint.ndim:
            raise IndexError(f"axis {axis} out of range")
        try:
            index[axis] = joint.supports[axis].index(symbol)
        except ValueError:
            raise KeyError(f"{symbol!r} is not in the support of axis {axis}") from None
    sub = joint.probs[tuple(index)]
    mass = float(sub.sum())
    if mass <= 0.0:
        raise UnconditionableError(f"evidence {dict(evidence)!r} has probability zero")
    keep = [s for i, s in enumerate(joint.supports) if i not in evidence]
    if not keep:
        raise IndexError("evidence fixes every axis")
    return FiniteDistribution.over(keep, sub / mass)


@dataclass(frozen=True)
class ConditionalKernel:
    """Rows ``P(. | x)`` over a shared output support, one per input symbol."""

    inputs: tuple
    outputs: tuple
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if m.shape != (len(self.inputs), len(self.outputs)):
            raise InvariantError("kernel matrix shape does not match inputs x outputs")
        for i, row in enumerate(m):
            _check_probs(row, f"kernel row {self.inputs[i]!r}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def row(self, x) -> FiniteDistribution:
        return FiniteDistribution(self.outputs, self.matrix[self.inputs.index(x)])

    def joint(self, p_in: FiniteDistribution) -> FiniteDistribution:
        return FiniteDistribution.over((self.inputs, self.outputs), p_in.probs[:, None] * self.matrix)


# -- kernel-array helpers shared by the bound modules -------------------------


def sample_law(p_z: np.ndarray, n: int) -> np.ndarray:
    """P_Z^{(x) n} as an n-axis table."""
    table = np.ones(())
    for _ in range(n):
        table = np.multiply.outer(table, p_z)
    return table


def average_axes(kernel: np.ndarray, p_z: np.ndarray, axes: Sequence[int], keepdims: bool = False) -> np.ndarray:
    """Average the given sample axes of ``kernel`` against ``p_z``.

    This realises ``P_{W | S_{keep}} = E[P_{W|S} | S_{keep}]`` for i.i.d. samples.
    """
    out = kernel
    for ax in sorted(axes, reverse=True):
        out = np.tensordot(out, p_z, axes=([ax], [0]))
        if keepdims:
            out = np.expand_dims(out, ax)
    return out


def _lipschitz_violation(loss: np.ndarray, dist: np.ndarray, lipschitz: float) -> float:
    # max over (w, w', z) of |l(w,z) - l(w',z)| - L rho(w, w')
    gaps = np.abs(loss[:, None, :] - loss[None, :, :]) - lipschitz * dist[:, :, None]
    return float(gaps.max(initial=0.0))


def tightest_lipschitz(loss: np.ndarray, dist: np.ndarray) -> float:
    """Smallest L with |l(w,z) - l(w',z)| <= L rho(w,w') for all w, w', z."""
    k = dist.shape[0]
    off = ~np.eye(k, dtype=bool)
    if not off.any():
        return 0.0
    gaps = np.abs(loss[:, None, :] - loss[None, :, :]).max(axis=2)
    return float((gaps[off] / dist[off]).max())


def _coerce_metric(metric, support) -> MetricSpace:
    if metric is None or (isinstance(metric, str) and metric == "discrete"):
        return MetricSpace.discrete(support)
    if isinstance(metric, MetricSpace):
        if tuple(metric.support) != tuple(support):
            raise InvariantError("metric support does not match the alphabet")
        return metric
    return MetricSpace(tuple(support), np.asarray(metric, dtype=float))


@dataclass(frozen=True)
class DiscreteScenario:
    """A finite learner in the standard setting.

    ``kernel`` has shape ``(|Z|,) * n + (|R|, |W|)``: entry ``[s, r, w]`` is
    ``P(W = w | S = s, R = r)`` for the ordered sample ``s``. ``loss`` has
    shape ``(|W|, |Z|)``. The metric lives on the hypothesis alphabet; an
    optional ``sample_metric`` on Z drives the backward-channel bounds.
    """

    samples: tuple
    n: int
    p_z: np.ndarray
    hypotheses: tuple
    kernel: np.ndarray
    loss: np.ndarray
    metric: MetricSpace | str | None = None
    lipschitz: float | None = None
    aux: tuple = ("-",)
    p_r: np.ndarray | None = None
    sample_metric: MetricSpace | str | None = None
    sample_lipschitz: float | None = None
    name: str = "scenario"

    def __post_init__(self):
        s = object.__setattr__
        s(self, "samples", tuple(self.samples))
        s(self, "hypotheses", tuple(self.hypotheses))
        s(self, "aux", tuple(self.aux))
        nz, nw, nr = len(self.samples), len(self.hypotheses), len(self.aux)
        if self.n < 1:
            raise InvariantError("n must be at least 1")
        if nz ** self.n * nr > ENUMERATION_GUARD:
            raise EnumerationGuardError(f"|Z|^n |R| = {nz ** self.n * nr} exceeds {ENUMERATION_GUARD}")
        p_z = _check_probs(self.p_z, "p_z")
        if p_z.shape != (nz,):
            raise InvariantError("p_z must have one entry per sample symbol")
        p_r = np.ones(1) if self.p_r is None else _check_probs(self.p_r, "p_r")
        if p_r.shape != (nr,):
            raise InvariantError("p_r must have one entry per auxiliary symbol")
        kernel = np.asarray(self.kernel, dtype=float)
        if kernel.shape == (nz,) * self.n + (nw,) and nr == 1:
            kernel = kernel[..., None, :]
        if kernel.shape != (nz,) * self.n + (nr, nw):
            raise InvariantError(f"kernel shape {kernel.shape} != {(nz,) * self.n + (nr, nw)}")
        if np.any(kernel < 0) or np.max(np.abs(kernel.sum(axis=-1) - 1.0)) > 1e-12:
            raise InvariantError("every kernel row must be a probability vector")
        loss = np.asarray(self.loss, dtype=float)
        if loss.shape != (nw, nz):
            raise InvariantError(f"loss table shape {loss.shape} != {(nw, nz)}")
        if not np.all(np.isfinite(loss)):
            raise InvariantError("loss values must be finite")
        metric = _coerce_metric(self.metric, self.hypotheses)
        lip = tightest_lipschitz(loss, metric.dist) if self.lipschitz is None else float(self.lipschitz)
        if _lipschitz_violation(loss, metric.dist, lip) > LIPSCHITZ_TOL:
            raise InvariantError(f"loss is not {lip}-Lipschitz in w under the hypothesis metric")
        zmetric = _coerce_metric(self.sample_metric, self.samples)
        zlip = tightest_lipschitz(loss.T, zmetric.dist) if self.sample_lipschitz is None else float(self.sample_lipschitz)
        if _lipschitz_violation(loss.T, zmetric.dist, zlip) > LIPSCHITZ_TOL:
            raise InvariantError(f"loss is not {zlip}-Lipschitz in z under the sample metric")
        for name, arr in (("p_z", p_z), ("p_r", p_r), ("kernel", kernel), ("loss", loss)):
            arr = np.array(arr)
            arr.setflags(write=False)
            s(self, name, arr)
        s(self, "metric", metric)
        s(self, "lipschitz", lip)
        s(self, "sample_metric", zmetric)
        s(self, "sample_lipschitz", zlip)

    @property
    def has_aux(self) -> bool:
        return len(self.aux) > 1

    @property
    def loss_range(self) -> tuple[float, float]:
        return float(self.loss.min()), float(self.loss.max())

    @property
    def p_s(self) -> np.ndarray:
        return sample_law(self.p_z, self.n)

    @property
    def forward(self) -> np.ndarray:
        """P_{W|S} with R averaged out, shape ``(|Z|,)*n + (|W|,)``."""
        return np.einsum("...rw,r->...w", self.kernel, self.p_r)

    @property
    def p_w(self) -> np.ndarray:
        return average_axes(self.forward, self.p_z, range(self.n))

    def joint_sw(self) -> np.ndarray:
        """P(S = s, W = w) as an (n+1)-axis table."""
        return self.p_s[..., None] * self.forward

    def joint(self) -> FiniteDistribution:
        """P(Z_1, ..., Z_n, W) as a :class:`FiniteDistribution`."""
        return FiniteDistribution.over([self.samples] * self.n + [self.hypotheses], self.joint_sw())

    def relabel(self, sample_perm: Sequence[int], hyp_perm: Sequence[int]) -> "DiscreteScenario":
        """Same learner with permuted symbol order (a pure relabelling)."""
        zp, wp = np.asarray(sample_perm), np.asarray(hyp_perm)
        kernel = self.kernel
        for ax in range(self.n):
            kernel = np.take(kernel, zp, axis=ax)
        kernel = np.take(kernel, wp, axis=-1)
        return DiscreteScenario(
            samples=[self.samples[i] for i in zp], n=self.n, p_z=self.p_z[zp],
            hypotheses=[self.hypotheses[i] for i in wp], kernel=kernel,
            loss=self.loss[np.ix_(wp, zp)],
            metric=self.metric.dist[np.ix_(wp, wp)], lipschitz=self.lipschitz,
            aux=self.aux, p_r=self.p_r,
            sample_metric=self.sample_metric.dist[np.ix_(zp, zp)],
            sample_lipschitz=self.sample_lipschitz, name=self.name,
        )


def exact_gen_error(scenario: DiscreteScenario) -> float:
    """E[L_{P_Z}(W) - L_S(W)] by enumeration over Z^n x R x W."""
    sc = scenario
    joint = sc.joint_sw()
    pop_risk = sc.loss @ sc.p_z  # L_{P_Z}(w)
    population = float((joint.sum(axis=tuple(range(sc.n))) * pop_risk).sum())
    empirical = 0.0
    for i in range(sc.n):
        # marginal of (Z_i, W)
        zi_w = joint.sum(axis=tuple(a for a in range(sc.n) if a != i))
        empirical += float((zi_w * sc.loss.T).sum())
    return population - empirical / sc.n


@dataclass(frozen=True)
class SupersampleScenario:
    """A learner in the randomized-subsample setting.

    ``kernel`` has shape ``(|Z|,) * 2n + (2,) * n + (|R|, |W|)`` and holds
    ``P(W | S~ = s~, U = u, R = r)``. The training set is
    ``z_i = s~[i + u_i n]``; the mask entries are fair coins.
    """

    samples: tuple
    n: int
    p_z: np.ndarray
    hypotheses: tuple
    kernel: np.ndarray
    loss: np.ndarray
    metric: MetricSpace | str | None = None
    lipschitz: float | None = None
    aux: tuple = ("-",)
    p_r: np.ndarray | None = None
    name: str = "supersample"

    def __post_init__(self):
        s = object.__setattr__
        s(self, "samples", tuple(self.samples))
        s(self, "hypotheses", tuple(self.hypotheses))
        s(self, "aux", tuple(self.aux))
        nz, nw, nr, n = len(self.samples), len(self.hypotheses), len(self.aux), self.n
        if n < 1:
            raise InvariantError("n must be at least 1")
        cells = nz ** (2 * n) * 2 ** n * nr
        if cells > ENUMERATION_GUARD:
            raise EnumerationGuardError(f"|Z|^2n 2^n |R| = {cells} exceeds {ENUMERATION_GUARD}")
        p_z = _check_probs(self.p_z, "p_z")
        p_r = np.ones(1) if self.p_r is None else _check_probs(self.p_r, "p_r")
        if p_z.shape != (nz,) or p_r.shape != (nr,):
            raise InvariantError("p_z / p_r sizes do not match their alphabets")
        kernel = np.asarray(self.kernel, dtype=float)
        shape = (nz,) * (2 * n) + (2,) * n + (nr, nw)
        if kernel.shape != shape:
            raise InvariantError(f"kernel shape {kernel.shape} != {shape}")
        if np.any(kernel < 0) or np.max(np.abs(kernel.sum(axis=-1) - 1.0)) > 1e-12:
            raise InvariantError("every kernel row must be a probability vector")
        loss = np.asarray(self.loss, dtype=float)
        if loss.shape != (nw, nz):
            raise InvariantError("loss table shape must be (|W|, |Z|)")
        metric = _coerce_metric(self.metric, self.hypotheses)
        lip = tightest_lipschitz(loss, metric.dist) if self.lipschitz is None else float(self.lipschitz)
        if _lipschitz_violation(loss, metric.dist, lip) > LIPSCHITZ_TOL:
            raise InvariantError(f"loss is not {lip}-Lipschitz in w under the hypothesis metric")
        for name, arr in (("p_z", p_z), ("p_r", p_r), ("kernel", kernel), ("loss", loss)):
            arr = np.array(arr)
            arr.setflags(write=False)
            s(self, name, arr)
        s(self, "metric", metric)
        s(self, "lipschitz", lip)

    @classmethod
    def from_standard(cls, scenario: DiscreteScenario) -> "SupersampleScenario":
        """Supersample view of a standard learner: W sees only the selected half."""
        sc = scenario
        n, nz = sc.n, len(sc.samples)
        shape = (nz,) * (2 * n) + (2,) * n + (len(sc.aux), len(sc.hypotheses))
        if nz ** (2 * n) * 2 ** n * len(sc.aux) > ENUMERATION_GUARD:
            raise EnumerationGuardError("supersample state space exceeds the enumeration guard")
        kernel = np.empty(shape)
        for st in itertools.product(range(nz), repeat=2 * n):
            for u in itertools.product((0, 1), repeat=n):
                s = tuple(st[i + u[i] * n] for i in range(n))
                kernel[st + u] = sc.kernel[s]
        return cls(
            samples=sc.samples, n=n, p_z=sc.p_z, hypotheses=sc.hypotheses, kernel=kernel,
            loss=sc.loss, metric=sc.metric, lipschitz=sc.lipschitz, aux=sc.aux, p_r=sc.p_r,
            name=sc.name,
        )

    @property
    def loss_range(self) -> tuple[float, float]:
        return float(self.loss.min()), float(self.loss.max())

    @property
    def has_aux(self) -> bool:
        return len(self.aux) > 1

    @property
    def p_supersample(self) -> np.ndarray:
        return sample_law(self.p_z, 2 * self.n)

    @property
    def forward(self) -> np.ndarray:
        """P_{W | S~, U} with R averaged out."""
        return np.einsum("...rw,r->...w", self.kernel, self.p_r)

    def joint_stuw(self) -> np.ndarray:
        """P(S~, U, W) as a (3n+1)-axis table."""
        p_st = self.p_supersample
        p_u = np.full((2,) * self.n, 0.5 ** self.n)
        return np.multiply.outer(p_st, p_u)[..., None] * self.forward

    def training_index(self, st: Sequence[int], u: Sequence[int]) -> tuple:
        return tuple(st[i + u[i] * self.n] for i in range(self.n))

    def induced_standard(self) -> DiscreteScenario:
        """Standard-setting learner with P_{W|S,R} = E[P_{W|S~,U,R} | S, R]."""
        n, nz = self.n, len(self.samples)
        acc = np.zeros((nz,) * n + (len(self.aux), len(self.hypotheses)))
        mass = np.zeros((nz,) * n)
        p_st = self.p_supersample
        for st in itertools.product(range(nz), repeat=2 * n):
            for u in itertools.product((0, 1), repeat=n):
                s = self.training_index(st, u)
                weight = p_st[st] * 0.5 ** n
                acc[s] += weight * self.kernel[st + u]
                mass[s] += weight
        kernel = np.empty_like(acc)
        positive = mass > 0
        kernel[positive] = acc[positive] / mass[positive][..., None, None]
        # zero-probability datasets: any valid row, here uniform
        kernel[~positive] = 1.0 / len(self.hypotheses)
        return DiscreteScenario(
            samples=self.samples, n=n, p_z=self.p_z, hypotheses=self.hypotheses, kernel=kernel,
            loss=self.loss, metric=self.metric, lipschitz=self.lipschitz, aux=self.aux,
            p_r=self.p_r, name=self.name,
        )

    def is_markov(self, tol: float = 1e-12) -> bool:
        """True when W depends on (S~, U) only through the training set S."""
        first: dict = {}
        nz = len(self.samples)
        for st in itertools.product(range(nz), repeat=2 * self.n):
            for u in itertools.product((0, 1), repeat=self.n):
                s = self.training_index(st, u)
                row = self.kernel[st + u]
                if s in first:
                    if np.max(np.abs(first[s] - row)) > tol:
                        return False
                else:
                    first[s] = row
        return True


def exact_empirical_gen_error(scenario: SupersampleScenario) -> float:
    """E[L_{S-bar}(W) - L_S(W)] by enumeration over S~ x U x R x W."""
    sc = scenario
    n = sc.n
    joint = sc.joint_stuw()
    total = 0.0
    for i in range(n):
        # marginal over (Z~_i, Z~_{i+n}, U_i, W)
        keep = (i, i + n, 2 * n + i, 3 * n)
        drop = tuple(a for a in range(3 * n + 1) if a not in keep)
        m = joint.sum(axis=drop)  # axes: z_i, z_{i+n}, u_i, w
        # u_i = 0: trains on z~_i, holds out z~_{i+n}; u_i = 1 the reverse
        first = sc.loss.T[:, None, :]   # l(w, z~_i) indexed [z_i, ., w]
        second = sc.loss.T[None, :, :]  # l(w, z~_{i+n}) indexed [., z_{i+n}, w]
        total += float((m[:, :, 0, :] * (second - first)).sum())
        total += float((m[:, :, 1, :] * (first - second)).sum())
    return total / n
