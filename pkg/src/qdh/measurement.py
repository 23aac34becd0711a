"""POVMs and quantum instruments acting on named subsystems.

Operators are given on the tensor product of the ``acting_on`` parties
(in the order listed) and embedded into the full layout by identity
elsewhere. All sampling takes an explicit integer seed.
"""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .linalg import DimensionError, as_matrix, hermitian_eig, is_hermitian
from .states import DensityOperator, PureState

ZERO_PROB = 1e-12
COMPLETENESS_TOL = 1e-10
PSD_TOL = 1e-9


def make_rng(seed):
    """PCG64 generator for a 64-bit seed. ``None`` is refused on purpose."""
    if seed is None:
        raise ValueError("an explicit rng seed is required")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def spawn_seeds(seed, n):
    """Derive ``n`` independent 64-bit child seeds from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


@dataclass(frozen=True)
class Povm:
    effects: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        effects = tuple(as_matrix(e) for e in self.effects)
        if not effects:
            raise ValueError("a POVM needs at least one effect")
        shape = effects[0].shape
        if any(e.shape != shape or shape[0] != shape[1] for e in effects):
            raise DimensionError("POVM effects must be square and of equal size")
        object.__setattr__(self, "effects", effects)
        labels = tuple(range(len(effects))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(effects):
            raise ValueError("one label per effect required")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self):
        return self.effects[0].shape[0]

    def probabilities(self, rho):
        """Effect-style Born rule ``Tr[E_k rho]``."""
        m = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho)
        return np.array([np.real(np.trace(e @ m)) for e in self.effects])


@dataclass(frozen=True)
class KrausInstrument:
    kraus_ops: tuple
    outcome_labels: tuple

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus_ops)
        if not ops:
            raise ValueError("an instrument needs at least one Kraus operator")
        if any(k.shape != ops[0].shape for k in ops):
            raise DimensionError("Kraus operators must share a shape")
        object.__setattr__(self, "kraus_ops", ops)
        labels = tuple(self.outcome_labels)
        if len(labels) != len(ops):
            raise ValueError("one outcome label per Kraus operator required")
        object.__setattr__(self, "outcome_labels", labels)

    @property
    def dim(self):
        return self.kraus_ops[0].shape[1]

    def povm(self):
        return Povm(tuple(k.conj().T @ k for k in self.kraus_ops), self.outcome_labels)


@dataclass(frozen=True)
class OutcomeBranch:
    label: Any
    probability: float
    post_state: Any = None

    @property
    def possible(self):
        return self.post_state is not None


def projective_instrument(vectors, labels=None):
    """Instrument of rank-one projectors onto the given orthonormal vectors."""
    ops = tuple(np.outer(v, np.conj(v)) for v in (np.asarray(v, dtype=complex) for v in vectors))
    return KrausInstrument(ops, tuple(range(len(ops))) if labels is None else tuple(labels))


def computational_basis(dim=2):
    return projective_instrument(np.eye(dim))


def fourier_basis(dim=2):
    """Measurement in the discrete Fourier basis; for a qubit this is {|+>, |->}."""
    w = np.exp(2j * np.pi / dim)
    vecs = [np.array([w ** (k * t) for t in range(dim)]) / np.sqrt(dim) for k in range(dim)]
    labels = ("+", "-") if dim == 2 else tuple(range(dim))
    return projective_instrument(vecs, labels)


def random_povm(dim, n_outcomes, rng):
    """Random full-rank POVM: ``S^{-1/2} A_k S^{-1/2}`` for Wishart-like ``A_k``."""
    raw = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raw.append(g @ g.conj().T)
    total = sum(raw)
    vals, vecs = hermitian_eig((total + total.conj().T) / 2)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.conj().T
    effects = []
    for a in raw:
        e = inv_sqrt @ a @ inv_sqrt
        effects.append((e + e.conj().T) / 2)
    return Povm(tuple(effects))


def validate(obj):
    """List of invariant violations; empty iff the POVM or instrument is valid."""
    problems = []
    if isinstance(obj, KrausInstrument):
        d = obj.dim
        total = sum(k.conj().T @ k for k in obj.kraus_ops)
        err = np.max(np.abs(total - np.eye(d)))
        if err > COMPLETENESS_TOL:
            problems.append(f"completeness: sum M^dag M deviates from identity by {err:.3e}")
        return problems
    if isinstance(obj, Povm):
        for i, e in enumerate(obj.effects):
            if not is_hermitian(e, PSD_TOL):
                problems.append(f"effect {i} ({obj.labels[i]}) is not Hermitian")
                continue
            low = hermitian_eig((e + e.conj().T) / 2)[0][-1]
            if low < -PSD_TOL:
                problems.append(f"effect {i} ({obj.labels[i]}) has negative eigenvalue {low:.3e}")
        err = np.max(np.abs(sum(obj.effects) - np.eye(obj.dim)))
        if err > COMPLETENESS_TOL:
            problems.append(f"completeness: sum of effects deviates from identity by {err:.3e}")
        return problems
    raise TypeError(f"cannot validate {type(obj).__name__}")


def _apply_local(tensor, op, axes, dims):
    """Contract ``op`` (on the factors ``axes``) into the given tensor axes."""
    k = len(axes)
    sub = [dims[a] for a in axes]
    op_t = np.asarray(op).reshape(sub + sub)
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _check_op(layout, op, acting_on):
    idx = layout.indices(acting_on)
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated labels in {acting_on}")
    d = int(np.prod([layout.dims[i] for i in idx]))
    if np.shape(op) != (d, d):
        raise DimensionError(f"operator of shape {np.shape(op)} cannot act on {tuple(acting_on)} (dim {d})")
    return idx


def apply_operator(vector, layout, op, acting_on):
    """``(op ⊗ I) |vector>`` without forming the full matrix."""
    idx = _check_op(layout, op, acting_on)
    psi = np.asarray(vector, dtype=complex).reshape(layout.dims)
    return _apply_local(psi, op, idx, list(layout.dims)).reshape(-1)


def embed_operator(op, layout, acting_on):
    """Full-space matrix of ``op`` acting on ``acting_on`` and identity elsewhere."""
    idx = _check_op(layout, op, acting_on)
    dims = list(layout.dims)
    eye = np.eye(layout.total_dim, dtype=complex).reshape(dims + dims)
    return _apply_local(eye, op, idx, dims + dims).reshape(layout.total_dim, layout.total_dim)


def _sandwich(rho_matrix, layout, op, acting_on):
    idx = _check_op(layout, op, acting_on)
    dims = list(layout.dims)
    n = len(dims)
    t = rho_matrix.reshape(dims + dims)
    t = _apply_local(t, op, idx, dims + dims)
    t = _apply_local(t, np.conj(op), [i + n for i in idx], dims + dims)
    return t.reshape(layout.total_dim, layout.total_dim)


def apply_instrument(state, inst, acting_on):
    """Enumerate every outcome branch of ``inst`` on ``state``.

    Branch ``t`` carries ``Tr[M_t rho M_t^dag]`` and the normalized post state.
    Branches below ``ZERO_PROB`` report probability 0 and no post state.
    """
    layout = state.layout
    branches = []
    for label, op in zip(inst.outcome_labels, inst.kraus_ops):
        if isinstance(state, PureState):
            out = apply_operator(state.amplitudes, layout, op, acting_on)
            p = float(np.vdot(out, out).real)
            post = PureState(layout, out / np.sqrt(p)) if p > ZERO_PROB else None
        else:
            out = _sandwich(np.asarray(state.matrix), layout, op, acting_on)
            p = float(np.trace(out).real)
            if p > ZERO_PROB:
                out = out / p
                post = DensityOperator(layout, (out + out.conj().T) / 2)
            else:
                post = None
        branches.append(OutcomeBranch(label, p if post is not None else 0.0, post))
    return branches


def kraus_channel(state, inst, acting_on):
    """Outcome-averaged state ``sum_t M_t rho M_t^dag``."""
    rho = state if isinstance(state, DensityOperator) else DensityOperator(
        state.layout, np.outer(state.amplitudes, state.amplitudes.conj())
    )
    acc = sum(_sandwich(np.asarray(rho.matrix), rho.layout, op, acting_on) for op in inst.kraus_ops)
    return DensityOperator(rho.layout, (acc + acc.conj().T) / 2)


def _draw(probs, u):
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return np.searchsorted(cdf, u, side="right")


def sample(state, inst, acting_on, rng_seed):
    """Draw one outcome; returns ``(label, post_state)``."""
    branches = apply_instrument(state, inst, acting_on)
    u = make_rng(rng_seed).random()
    k = int(_draw(np.array([b.probability for b in branches]), u))
    k = min(k, len(branches) - 1)
    return branches[k].label, branches[k].post_state


def sample_many(state, inst, acting_on, n, rng_seed):
    """Labels of ``n`` independent repetitions of the same measurement."""
    branches = apply_instrument(state, inst, acting_on)
    probs = np.array([b.probability for b in branches])
    ks = _draw(probs, make_rng(rng_seed).random(n))
    ks = np.minimum(ks, len(branches) - 1)
    return [branches[k].label for k in ks]


def povm_probabilities(state, povm, acting_on=None, kraus_form=False):
    """Outcome distribution of ``povm``.

    With ``kraus_form`` the effects are read as operators ``N_k`` applied as
    ``Tr[N_k rho N_k^dag]`` rather than ``Tr[N_k rho]``.
    """
    layout = state.layout
    acting_on = layout.labels if acting_on is None else tuple(acting_on)
    rho = np.asarray(state.matrix) if isinstance(state, DensityOperator) else np.outer(
        state.amplitudes, state.amplitudes.conj()
    )
    probs = []
    for e in povm.effects:
        if kraus_form:
            probs.append(np.trace(_sandwich(rho, layout, e, acting_on)).real)
        else:
            probs.append(np.trace(embed_operator(e, layout, acting_on) @ rho).real)
    return np.array(probs)
