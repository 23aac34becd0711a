"""Labelled multi-party pure states and density operators."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linalg import (
    ALGEBRA_TOL,
    ContractViolation,
    DimensionError,
    as_matrix,
    is_hermitian,
    kron_all,
    partial_trace,
    trace_norm,
)

PSD_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SystemLayout:
    """Ordered parties ``(label, local_dim)``; the order fixes the tensor ordering."""

    parties: tuple
    sender_index: Optional[int] = None

    def __post_init__(self):
        parties = tuple((str(lbl), int(d)) for lbl, d in self.parties)
        object.__setattr__(self, "parties", parties)
        labels = [p[0] for p in parties]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate party labels in {labels}")
        if any(d < 1 for _, d in parties):
            raise ValueError("local dimensions must be positive")
        if self.sender_index is not None and not 0 <= self.sender_index < len(parties):
            raise ValueError(f"sender_index {self.sender_index} out of range")

    @classmethod
    def qubits(cls, labels, sender=None):
        labels = list(labels)
        return cls(tuple((lbl, 2) for lbl in labels), None if sender is None else labels.index(sender))

    @property
    def labels(self):
        return tuple(p[0] for p in self.parties)

    @property
    def dims(self):
        return tuple(p[1] for p in self.parties)

    @property
    def total_dim(self):
        return int(np.prod(self.dims)) if self.parties else 1

    @property
    def sender(self):
        return None if self.sender_index is None else self.labels[self.sender_index]

    @property
    def receivers(self):
        return tuple(lbl for i, lbl in enumerate(self.labels) if i != self.sender_index)

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown party label {label!r}; layout has {self.labels}") from None

    def indices(self, labels):
        return [self.index(lbl) for lbl in labels]

    def restrict(self, labels):
        """Sub-layout on ``labels``, keeping this layout's ordering."""
        keep = sorted(set(self.indices(labels)))
        sender = self.sender_index if self.sender_index in keep else None
        return SystemLayout(
            tuple(self.parties[i] for i in keep),
            None if sender is None else keep.index(sender),
        )

    def subdim(self, labels):
        return int(np.prod([self.dims[i] for i in self.indices(labels)]))


@dataclass(frozen=True)
class PureState:
    layout: SystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size != self.layout.total_dim:
            raise DimensionError(f"{amps.size} amplitudes for a layout of dimension {self.layout.total_dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > ALGEBRA_TOL:
            raise ContractViolation(f"state not normalized (norm {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, layout, vector):
        v = np.asarray(vector, dtype=complex).ravel()
        n = np.linalg.norm(v)
        if n == 0:
            raise ContractViolation("cannot normalize the zero vector")
        return cls(layout, v / n)

    @classmethod
    def product(cls, layout, local_vectors):
        return cls.normalized(layout, kron_all(*[np.asarray(v, dtype=complex) for v in local_vectors]))

    def inner(self, other):
        """``<self|other>``"""
        if self.layout != other.layout:
            raise DimensionError("layout mismatch")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self):
        return pure_to_density(self)


@dataclass(frozen=True)
class DensityOperator:
    layout: SystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match layout dimension {d}")
        if not is_hermitian(m):
            raise ContractViolation("density operator must be Hermitian")
        tr = np.trace(m)
        if abs(tr - 1) > ALGEBRA_TOL:
            raise ContractViolation(f"density operator trace is {tr!r}, expected 1")
        try:
            np.linalg.cholesky(m + PSD_TOL * np.eye(d))
        except np.linalg.LinAlgError:
            raise ContractViolation("density operator has an eigenvalue below -1e-9") from None
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def mixture(cls, layout, states, weights=None):
        """Convex combination of pure states or density operators."""
        states = list(states)
        if weights is None:
            weights = np.full(len(states), 1 / len(states))
        acc = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
        for w, s in zip(weights, states):
            if isinstance(s, PureState):
                acc += w * np.outer(s.amplitudes, s.amplitudes.conj())
            else:
                acc += w * s.matrix
        return cls(layout, acc)


@dataclass(frozen=True)
class Partition:
    """Receiver groups; quantum communication inside a group, classical across."""

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple(str(lbl) for lbl in g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if not groups:
            raise ValueError("partition needs at least one group")
        seen = set()
        for g in groups:
            if not g:
                raise ValueError("partition groups must be nonempty")
            for lbl in g:
                if lbl in seen:
                    raise ValueError(f"label {lbl!r} appears in more than one group")
                seen.add(lbl)

    @property
    def labels(self):
        return tuple(lbl for g in self.groups for lbl in g)

    def check_covers(self, receivers: Sequence[str]):
        if set(self.labels) != set(receivers):
            raise ValueError(f"partition {self.groups} does not cover receivers {tuple(receivers)}")


def pure_to_density(s):
    return DensityOperator(s.layout, np.outer(s.amplitudes, s.amplitudes.conj()))


def reduced_state(rho, keep):
    """Reduced state on the parties in ``keep`` (layout order preserved)."""
    if isinstance(rho, PureState):
        rho = pure_to_density(rho)
    layout = rho.layout
    idx = layout.indices(keep)
    m = partial_trace(rho.matrix, layout.dims, idx)
    m = (m + m.conj().T) / 2
    return DensityOperator(layout.restrict(keep), m)


def trace_distance(a, b):
    if a.layout != b.layout:
        raise DimensionError("layout mismatch")
    return 0.5 * trace_norm(np.asarray(a.matrix) - np.asarray(b.matrix))


def fidelity(a, b):
    """``|<a|b>|^2`` for pure states."""
    return abs(a.inner(b)) ** 2


def equal_up_to_global_phase(a, b, tol=ALGEBRA_TOL):
    return fidelity(a, b) >= 1 - tol


def state_to_json(state):
    """Serializable document: layout plus amplitudes as ``[re, im]`` pairs."""
    return {
        "layout": {
            "labels": list(state.layout.labels),
            "dims": list(state.layout.dims),
            "sender": state.layout.sender,
        },
        "amplitudes": [[float(z.real), float(z.imag)] for z in state.amplitudes],
    }


def state_from_json(doc):
    lay = doc["layout"]
    labels = list(lay["labels"])
    sender = lay.get("sender")
    layout = SystemLayout(tuple(zip(labels, lay["dims"])), None if sender is None else labels.index(sender))
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    return PureState(layout, amps)
