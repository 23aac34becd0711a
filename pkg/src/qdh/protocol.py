"""Generic hiding schemes built from per-group subprotocols.

A scheme hides ``b in {0..m-1}`` in a state shared between a sender qudit
and a partitioned set of receivers::

    |psi> = m^{-1/2} sum_t |t>_S  (x)_j |phi_j(t)>

where ``phi_j(t)`` is a member of the class ``l_j(t)`` of group ``j``'s
subprotocol and ``t + sum_j l_j(t) = b (mod m)``. The sender reveals by
measuring ``S`` in the computational basis and announcing ``t``; it burns
by measuring in the Fourier basis instead.
"""

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional

import numpy as np

from .linalg import ALGEBRA_TOL, kron_all, trace_norm
from .measurement import (
    KrausInstrument,
    Povm,
    apply_instrument,
    computational_basis,
    fourier_basis,
    make_rng,
)
from .states import (
    DensityOperator,
    Partition,
    PureState,
    SystemLayout,
    fidelity,
    reduced_state,
    trace_distance,
)


@dataclass(frozen=True)
class Subprotocol:
    """Orthonormal group states split into ``m`` labelled classes."""

    name: str
    group_labels: tuple
    members: tuple
    classes: tuple

    def __post_init__(self):
        object.__setattr__(self, "group_labels", tuple(self.group_labels))
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "classes", tuple(tuple(int(i) for i in c) for c in self.classes))
        if len(self.classes) < 2:
            raise ValueError("a subprotocol needs m >= 2 classes")
        if any(not c for c in self.classes):
            raise ValueError("every class must be nonempty")
        flat = sorted(i for c in self.classes for i in c)
        if flat != list(range(len(self.members))):
            raise ValueError("classes must partition the member indices")
        layout = self.members[0].layout
        if layout.labels != self.group_labels or any(s.layout != layout for s in self.members):
            raise ValueError("members must live on the group layout")
        gram = np.array([[a.inner(b) for b in self.members] for a in self.members])
        err = np.max(np.abs(gram - np.eye(len(self.members))))
        if err > ALGEBRA_TOL:
            raise ValueError(f"members are not orthonormal (max Gram error {err:.3e})")

    @property
    def m(self):
        return len(self.classes)

    @property
    def layout(self):
        return self.members[0].layout

    def class_of(self, member_index):
        for c, idx in enumerate(self.classes):
            if member_index in idx:
                return c
        raise IndexError(member_index)

    @property
    def mixtures(self):
        return tuple(DensityOperator.mixture(self.layout, [self.members[i] for i in c]) for c in self.classes)

    def class_projectors(self):
        out = []
        for c in self.classes:
            out.append(sum(np.outer(self.members[i].amplitudes, self.members[i].amplitudes.conj()) for i in c))
        return out

    def class_povm(self):
        """Projectors onto each class span, plus the complement when nonzero.

        The complement outcome is labelled ``None``.
        """
        projs = self.class_projectors()
        rest = np.eye(self.layout.total_dim) - sum(projs)
        labels = list(range(self.m))
        if np.max(np.abs(rest)) > ALGEBRA_TOL:
            projs.append(rest)
            labels.append(None)
        return Povm(tuple(projs), tuple(labels))


@dataclass(frozen=True)
class Candidate:
    """One encoding state of secret ``secret``.

    ``labels[t]`` are the class labels ``(b_1..b_n)`` realized when the
    sender obtains ``t``; ``members[j][t]`` is the member index of group
    ``j`` used in that branch.
    """

    secret: int
    family: int
    labels: tuple
    members: tuple
    state: PureState

    @property
    def key(self):
        """Family plus the set of members used in each group (matches candidates across secrets)."""
        return (self.family, tuple(tuple(sorted(set(g))) for g in self.members))


@dataclass(frozen=True)
class EncodingScheme:
    layout: SystemLayout
    partition: Partition
    m: int
    subprotocols: tuple
    candidates: dict = field(compare=False)
    sender_reveal: KrausInstrument = field(compare=False)
    sender_burn: Optional[KrausInstrument] = field(default=None, compare=False)

    @property
    def sender(self):
        return self.layout.sender

    @property
    def receivers(self):
        return self.layout.receivers

    @property
    def receiver_layout(self):
        return self.layout.restrict(self.receivers)

    def candidate_list(self, b):
        return self.candidates[b]

    def decode_violations(self):
        """Candidates whose branch labels do not decode to their own secret."""
        bad = []
        for b, cands in self.candidates.items():
            for k, c in enumerate(cands):
                for t, labels in enumerate(c.labels):
                    if decode(t, labels, self.m) != b:
                        bad.append((b, k, t))
        return bad

    def without_family(self, b, family):
        """Copy with every candidate of family ``family`` removed from secret ``b``."""
        cands = dict(self.candidates)
        cands[b] = tuple(c for c in cands[b] if c.family != family)
        return replace(self, candidates=cands)

    def with_burn(self, instrument):
        return replace(self, sender_burn=instrument)


def xor_pairing(b, m, n_groups):
    """Families for secret ``b``: each is a list, over sender outcomes ``t``, of group labels.

    The first ``n-1`` labels are fixed per family; the last one absorbs
    ``b - t - sum(others) (mod m)``.
    """
    families = []
    for head in itertools.product(range(m), repeat=n_groups - 1):
        rows = []
        for t in range(m):
            last = (b - t - sum(head)) % m
            rows.append(tuple(head) + (last,))
        families.append(rows)
    return families


def build_scheme(partition, subprotocols, pairing_rule: Callable = xor_pairing, sender_label="S", sender_dim=None,
                 reveal=None, burn="fourier"):
    """Assemble the encoding scheme for ``partition`` from one subprotocol per group.

    ``pairing_rule(b, m, n_groups)`` returns the families for secret ``b``.
    Every combination of in-class member choices is enumerated, so the
    candidate list is the uniform ensemble the receivers face.
    """
    subprotocols = tuple(subprotocols)
    if len(subprotocols) != len(partition.groups):
        raise ValueError(f"{len(partition.groups)} groups but {len(subprotocols)} subprotocols")
    for g, sp in zip(partition.groups, subprotocols):
        if tuple(g) != sp.group_labels:
            raise ValueError(f"group {g} does not match subprotocol labels {sp.group_labels}")
    ms = {sp.m for sp in subprotocols}
    if len(ms) != 1:
        raise ValueError(f"subprotocols disagree on the alphabet size: {sorted(ms)}")
    m = ms.pop()
    sender_dim = m if sender_dim is None else int(sender_dim)
    if sender_dim < m:
        raise ValueError(f"sender dimension {sender_dim} < alphabet size {m}")
    if sender_label in partition.labels:
        raise ValueError(f"sender label {sender_label!r} collides with a receiver")

    parties = [(sender_label, sender_dim)]
    for sp in subprotocols:
        parties.extend(sp.layout.parties)
    layout = SystemLayout(tuple(parties), 0)
    n = len(subprotocols)
    sender_basis = np.eye(sender_dim)

    candidates = {}
    for b in range(m):
        cands = []
        for fam, rows in enumerate(pairing_rule(b, m, n)):
            rows = tuple(tuple(int(x) for x in r) for r in rows)
            used = [sorted({rows[t][j] for t in range(m)}) for j in range(n)]
            slots = [(j, c) for j in range(n) for c in used[j]]
            for pick in itertools.product(*[subprotocols[j].classes[c] for j, c in slots]):
                chosen = dict(zip(slots, pick))
                members = tuple(tuple(chosen[(j, rows[t][j])] for t in range(m)) for j in range(n))
                vec = sum(
                    kron_all(sender_basis[t], *[subprotocols[j].members[members[j][t]].amplitudes for j in range(n)])
                    for t in range(m)
                )
                state = PureState.normalized(layout, vec)
                cands.append(Candidate(b, fam, rows, members, state))
        candidates[b] = tuple(cands)

    reveal = computational_basis(sender_dim) if reveal is None else reveal
    burn = named_instrument(burn, sender_dim) if isinstance(burn, str) else burn
    return EncodingScheme(layout, partition, m, subprotocols, candidates, reveal, burn)


def named_instrument(name, dim):
    if name == "computational":
        return computational_basis(dim)
    if name in ("fourier", "plus-minus"):
        return fourier_basis(dim)
    raise ValueError(f"unknown instrument {name!r}")


def ensemble_state(scheme, b):
    """Receivers' state for secret ``b``, averaged uniformly over candidates."""
    cands = scheme.candidates[b]
    parts = [reduced_state(c.state, scheme.receivers).matrix for c in cands]
    return DensityOperator(scheme.receiver_layout, sum(parts) / len(parts))


@dataclass(frozen=True)
class HidingReport:
    max_pairwise_trace_distance: float
    distances: dict
    decode_violations: list
    passed: bool


def verify_hiding(scheme, tol=ALGEBRA_TOL):
    states = {b: ensemble_state(scheme, b) for b in range(scheme.m) if scheme.candidates.get(b)}
    dists = {}
    for b, b2 in itertools.combinations(sorted(states), 2):
        dists[(b, b2)] = trace_distance(states[b], states[b2])
    worst = max(dists.values(), default=0.0)
    return HidingReport(worst, dists, scheme.decode_violations(), worst <= tol)


def decode(t, labels, m):
    """Secret ``(t + sum(labels)) mod m``."""
    t = int(t)
    labels = [int(x) for x in labels]
    if not 0 <= t < m or any(not 0 <= x < m for x in labels):
        raise ValueError(f"outcome {t} or labels {labels} outside [0, {m})")
    return (t + sum(labels)) % m


def _receiver_vector(scheme, full_state):
    """Receivers' pure state when the sender factor is a product (after a projective outcome)."""
    dS = scheme.layout.dims[0]
    mat = full_state.amplitudes.reshape(dS, -1)
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size > 1 and s[1] > 1e-9:
        raise ValueError("post-measurement state is still entangled with the sender")
    row = int(np.argmax(np.linalg.norm(mat, axis=1)))
    return PureState.normalized(scheme.receiver_layout, mat[row])


@dataclass(frozen=True)
class RevealResult:
    t: Any
    probability: float
    post_state: PureState
    labels: tuple


def reveal_branches(scheme, b, candidate_choice):
    """All sender outcomes with their probability, receiver state and labels."""
    cand = scheme.candidates[b][candidate_choice]
    out = []
    for i, br in enumerate(apply_instrument(cand.state, scheme.sender_reveal, [scheme.sender])):
        if not br.possible:
            continue
        labels = cand.labels[i] if i < len(cand.labels) else None
        out.append(RevealResult(br.label, br.probability, _receiver_vector(scheme, br.post_state), labels))
    return out


def reveal(scheme, b, candidate_choice, rng_seed):
    """Sender measures and announces ``t``; returns the branch that occurred."""
    branches = reveal_branches(scheme, b, candidate_choice)
    probs = np.array([br.probability for br in branches])
    u = make_rng(rng_seed).random()
    k = min(int(np.searchsorted(np.cumsum(probs) / probs.sum(), u, side="right")), len(branches) - 1)
    return branches[k]


def group_label_distribution(scheme, receiver_state, povms=None):
    """Joint distribution of per-group outcome labels on a receiver state.

    ``povms`` defaults to each subprotocol's class-span measurement.
    Returns a list of ``(labels tuple, probability)``.
    """
    povms = [sp.class_povm() for sp in scheme.subprotocols] if povms is None else list(povms)
    if isinstance(receiver_state, PureState):
        psi = receiver_state.amplitudes.reshape([sp.layout.total_dim for sp in scheme.subprotocols])
        rho = None
    else:
        rho = np.asarray(receiver_state.matrix)
    out = []
    for combo in itertools.product(*[range(len(p.effects)) for p in povms]):
        eff = kron_all(*[povms[j].effects[k] for j, k in enumerate(combo)])
        if rho is None:
            v = psi.reshape(-1)
            p = float(np.vdot(v, eff @ v).real)
        else:
            p = float(np.trace(eff @ rho).real)
        out.append((tuple(povms[j].labels[k] for j, k in enumerate(combo)), max(p, 0.0)))
    return out


def authorized_decode(scheme, result, rng_seed, povms=None):
    """Each group measures its class label; the labels and ``t`` decode the secret.

    Returns ``(secret or None, labels)``; ``None`` when a group hits the
    complement outcome or ``t`` is outside the alphabet.
    """
    dist = group_label_distribution(scheme, result.post_state, povms)
    probs = np.array([p for _, p in dist])
    u = make_rng(rng_seed).random()
    k = min(int(np.searchsorted(np.cumsum(probs) / probs.sum(), u, side="right")), len(dist) - 1)
    labels = dist[k][0]
    t = result.t
    if any(x is None for x in labels) or not isinstance(t, (int, np.integer)) or not 0 <= t < scheme.m:
        return None, labels
    return decode(t, labels, scheme.m), labels


@dataclass(frozen=True)
class BurnReport:
    min_cross_secret_fidelity: float
    max_ensemble_distance: float
    unmatched: int
    passed: bool


def _burned_joint(scheme, b, k):
    """Sub-normalized receiver state after burn outcome ``k``, averaged over candidates of ``b``."""
    d = scheme.receiver_layout.total_dim
    acc = np.zeros((d, d), dtype=complex)
    cands = scheme.candidates[b]
    for c in cands:
        br = apply_instrument(c.state, scheme.sender_burn, [scheme.sender])[k]
        if br.possible:
            acc += br.probability * reduced_state(br.post_state, scheme.receivers).matrix
    return acc / len(cands)


def verify_burn(scheme, tol=ALGEBRA_TOL):
    """Post-burn states must not depend on the secret, up to a global phase."""
    if scheme.m < 2:
        return BurnReport(1.0, 0.0, 0, True)
    if scheme.sender_burn is None:
        raise ValueError("scheme has no burn instrument")
    burn = scheme.sender_burn
    branches = {
        b: {c.key: apply_instrument(c.state, burn, [scheme.sender]) for c in scheme.candidates[b]}
        for b in range(scheme.m)
    }
    min_fid = 1.0
    unmatched = 0
    for b, b2 in itertools.combinations(range(scheme.m), 2):
        for key, brs in branches[b].items():
            other = branches[b2].get(key)
            if other is None:
                unmatched += 1
                continue
            for x, y in zip(brs, other):
                if not x.possible and not y.possible:
                    continue
                if x.possible != y.possible:
                    min_fid = 0.0
                    continue
                min_fid = min(min_fid, fidelity(x.post_state, y.post_state))

    worst = 0.0
    for k in range(len(burn.kraus_ops)):
        joints = [_burned_joint(scheme, b, k) for b in range(scheme.m)]
        for x, y in itertools.combinations(joints, 2):
            worst = max(worst, 0.5 * trace_norm(x - y))
    return BurnReport(min_fid, worst, unmatched, min_fid >= 1 - tol and worst <= tol)


def burn_branches(scheme, b, candidate_choice):
    cand = scheme.candidates[b][candidate_choice]
    out = []
    for br in apply_instrument(cand.state, scheme.sender_burn, [scheme.sender]):
        if br.possible:
            out.append(RevealResult(br.label, br.probability, _receiver_vector(scheme, br.post_state), None))
    return out


@dataclass(frozen=True)
class ParallelInstance:
    """``n`` independent blocks of one scheme, each hiding its own secret."""

    scheme: EncodingScheme
    secrets: tuple
    choices: tuple

    @property
    def n_blocks(self):
        return len(self.secrets)

    @property
    def layout(self):
        parties = []
        for k in range(self.n_blocks):
            parties.extend((f"{lbl}{k}", d) for lbl, d in self.scheme.layout.parties)
        return SystemLayout(tuple(parties))

    def block_states(self):
        return [self.scheme.candidates[b][c].state for b, c in zip(self.secrets, self.choices)]

    def reveal(self, rng_seed):
        seeds = np.random.SeedSequence(int(rng_seed)).spawn(self.n_blocks)
        return [
            reveal(self.scheme, b, c, int(s.generate_state(1, dtype=np.uint64)[0]))
            for b, c, s in zip(self.secrets, self.choices, seeds)
        ]

    def authorized_decode(self, rng_seed):
        """Reveal and decode every block; returns the recovered secrets."""
        s_reveal, s_measure = np.random.SeedSequence(int(rng_seed)).spawn(2)
        results = self.reveal(int(s_reveal.generate_state(1, dtype=np.uint64)[0]))
        seeds = s_measure.spawn(self.n_blocks)
        return tuple(
            authorized_decode(self.scheme, r, int(s.generate_state(1, dtype=np.uint64)[0]))[0]
            for r, s in zip(results, seeds)
        )


def parallel_blocks(scheme, n_blocks, secret_bits, rng_seed):
    """Draw an independent candidate for every block."""
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    secrets = tuple(int(b) for b in secret_bits)
    if len(secrets) != n_blocks:
        raise ValueError(f"{n_blocks} blocks but {len(secrets)} secrets")
    rng = make_rng(rng_seed)
    choices = tuple(int(rng.integers(len(scheme.candidates[b]))) for b in secrets)
    return ParallelInstance(scheme, secrets, choices)


def composite_ensemble_state(scheme, secrets):
    """Receivers' state over all blocks: the tensor product of per-block ensembles."""
    return kron_all(*[np.asarray(ensemble_state(scheme, b).matrix) for b in secrets])


def scheme_from_description(doc):
    """Build a scheme from a JSON-style description.

    Keys: ``partition`` (list of label lists), ``m``, ``subprotocols``
    (``{"name": "bell"}`` or ``{"name": "upb", "theta": ...}``), ``reveal``
    and ``burn`` instrument names, and optionally ``drop_families``
    (list of ``{"secret", "family"}``) to build deliberately broken fixtures.
    """
    from . import fiveparty

    allowed = {"partition", "m", "subprotocols", "reveal", "burn", "drop_families"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown scheme field(s): {sorted(unknown)}")
    partition = Partition(tuple(tuple(g) for g in doc["partition"]))
    subs = []
    for g, spec in zip(partition.groups, doc["subprotocols"]):
        subs.append(fiveparty.named_subprotocol(spec, g))
    scheme = build_scheme(partition, subs)
    if "m" in doc and int(doc["m"]) != scheme.m:
        raise ValueError(f"declared m={doc['m']} but subprotocols give m={scheme.m}")
    dS = scheme.layout.dims[0]
    scheme = replace(
        scheme,
        sender_reveal=named_instrument(doc.get("reveal", "computational"), dS),
        sender_burn=named_instrument(doc.get("burn", "fourier"), dS),
    )
    for drop in doc.get("drop_families", []):
        scheme = scheme.without_family(int(drop["secret"]), int(drop["family"]))
    return scheme


def load_scheme(path):
    with open(path) as fh:
        return scheme_from_description(json.load(fh))
