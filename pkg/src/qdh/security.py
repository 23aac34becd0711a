"""Information leakage of hiding schemes.

Classical guessing channels and their entropies, the Helstrom optimum,
the bias bound ``I <= delta * H``, XOR amplification of the bias over
parallel blocks, and attacks restricted to particular measurement classes.
"""

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import kron_all, trace_norm
from .measurement import Povm, make_rng
from .protocol import decode, reveal_branches
from .states import reduced_state

ATTACK_KINDS = ("global_povm", "per_group_quantum_with_classical_across", "local_projective_one_way")
BOUND_SLACK = 1e-9


def shannon_entropy(dist):
    """Entropy in bits; ``0 log 0 = 0``."""
    p = np.asarray(dist, dtype=float).ravel()
    if np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-9:
        raise ValueError(f"not a probability distribution: {p}")
    p = np.clip(p, 0.0, None)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def mutual_information(joint):
    """``I(B;K) = H(B) + H(K) - H(B,K)`` from the joint table ``P(b, k)``."""
    j = np.asarray(joint, dtype=float)
    if j.ndim != 2:
        raise ValueError("joint distribution must be a 2-D table")
    mi = shannon_entropy(j.sum(axis=1)) + shannon_entropy(j.sum(axis=0)) - shannon_entropy(j)
    return max(mi, 0.0)


def mutual_information_conditional(channel, prior):
    """Same quantity as ``sum_b p(b) D(P(.|b) || P(.))``, the conditional form."""
    w = np.asarray(channel, dtype=float)
    prior = np.asarray(prior, dtype=float)
    out = prior @ w
    total = 0.0
    for pb, row in zip(prior, w):
        mask = (row > 0) & (pb > 0)
        total += pb * np.sum(row[mask] * np.log2(row[mask] / out[mask]))
    return max(float(total), 0.0)


@dataclass(frozen=True)
class GuessingChannel:
    """``matrix[b, k] = P(outcome k | secret b)``."""

    matrix: np.ndarray
    prior: np.ndarray
    trials: Optional[np.ndarray] = None

    def joint(self):
        return self.prior[:, None] * self.matrix

    def mutual_information(self):
        return mutual_information(self.joint())

    def as_binary(self):
        if self.matrix.shape != (2, 2):
            raise ValueError(f"channel has shape {self.matrix.shape}, not 2x2")
        return BinaryChannel(float(self.matrix[0, 0]), float(self.matrix[1, 0]), float(self.prior[0]))

    def to_json(self):
        doc = {"matrix": self.matrix.tolist(), "prior": self.prior.tolist()}
        if self.trials is not None:
            doc["trials_per_secret"] = [int(x) for x in self.trials]
        return doc


@dataclass(frozen=True)
class BinaryChannel:
    p_guess0_given0: float
    p_guess0_given1: float
    prior0: float = 0.5

    def __post_init__(self):
        for v in (self.p_guess0_given0, self.p_guess0_given1, self.prior0):
            if not 0 <= v <= 1:
                raise ValueError(f"probability {v} outside [0, 1]")

    @property
    def matrix(self):
        a, b = self.p_guess0_given0, self.p_guess0_given1
        return np.array([[a, 1 - a], [b, 1 - b]])

    @property
    def prior(self):
        return np.array([self.prior0, 1 - self.prior0])

    def mutual_information(self):
        return mutual_information(self.prior[:, None] * self.matrix)

    def canonical(self):
        """Relabel guesses so that guess 0 is at least as likely under truth 0 as under truth 1.

        In this orientation the maximum-likelihood decision keeps labels.
        """
        if self.p_guess0_given0 >= self.p_guess0_given1:
            return self
        return BinaryChannel(1 - self.p_guess0_given0, 1 - self.p_guess0_given1, self.prior0)


@dataclass(frozen=True)
class BiasReport:
    delta: float
    delta_raw: float
    mutual_info_bits: float
    entropy_bits: float
    bound_delta_times_H: float
    holds: bool
    n_blocks: Optional[int] = None
    amplified_bias: Optional[float] = None

    @property
    def budget(self):
        """Tightest available bound on the group's attainable information."""
        bounds = [self.bound_delta_times_H]
        if self.amplified_bias is not None:
            bounds.append(self.amplified_bias * self.entropy_bits)
        return min(bounds)

    def to_json(self):
        return {
            "delta": self.delta,
            "delta_raw": self.delta_raw,
            "mutual_info_bits": self.mutual_info_bits,
            "entropy_bits": self.entropy_bits,
            "bound_delta_times_H": self.bound_delta_times_H,
            "holds": self.holds,
            "n_blocks": self.n_blocks,
            "amplified_bias": self.amplified_bias,
        }


def divincenzo_bound(channel, n_blocks=None):
    """Bias ``delta`` of a binary guessing channel and the bound ``I <= delta * H(B)``.

    ``delta = |p(0|0) + p(1|1) - 1|`` on the canonically labelled channel;
    ``delta_raw`` is ``|p(0|0) + p(0|1) - 1|`` read off the input as given.
    """
    raw = abs(channel.p_guess0_given0 + channel.p_guess0_given1 - 1)
    c = channel.canonical()
    delta = abs(c.p_guess0_given0 + (1 - c.p_guess0_given1) - 1)
    mi = channel.mutual_information()
    h = shannon_entropy(channel.prior)
    bound = delta * h
    amplified = None if n_blocks is None else xor_amplify(delta, n_blocks)
    return BiasReport(delta, raw, mi, h, bound, mi <= bound + BOUND_SLACK, n_blocks, amplified)


def xor_amplify(per_block_delta, n):
    """Bias of the XOR of ``n`` independent blocks of bias ``delta``: ``delta**n``."""
    if not 0 <= per_block_delta <= 1:
        raise ValueError(f"delta={per_block_delta} outside [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    return per_block_delta**n


def xor_bias_oracle(per_block_delta, n):
    """Optimal parity-guess bias by convolving ``n`` block channels.

    Each block is the symmetric channel with ``P(correct) = (1 + delta)/2``
    and uniform truth. The joint table of (true parity, guessed parity) is
    built by XOR-convolution; the returned value is the bias of the best
    parity guess read from it.
    """
    p_ok = (1 + per_block_delta) / 2
    block = 0.5 * np.array([[p_ok, 1 - p_ok], [1 - p_ok, p_ok]])
    joint = np.array([[1.0, 0.0], [0.0, 0.0]])
    for _ in range(n):
        new = np.zeros((2, 2))
        for x1, y1, x2, y2 in itertools.product(range(2), repeat=4):
            new[x1 ^ x2, y1 ^ y2] += joint[x1, y1] * block[x2, y2]
        joint = new
    cond = joint / joint.sum(axis=1, keepdims=True)
    return float(abs(cond[0, 0] + cond[1, 1] - 1))


def attainable_info_budget(reports):
    """Subadditive budget: the sum over groups of each group's tightest bound."""
    return float(sum(r.budget for r in reports))


def helstrom(rho0, rho1, prior0=0.5):
    """Optimal success probability for telling ``rho0`` from ``rho1``."""
    if not 0 <= prior0 <= 1:
        raise ValueError("prior0 must lie in [0, 1]")
    a = np.asarray(getattr(rho0, "matrix", rho0))
    b = np.asarray(getattr(rho1, "matrix", rho1))
    if getattr(rho0, "layout", None) != getattr(rho1, "layout", None) or a.shape != b.shape:
        raise ValueError("states live on different layouts")
    return 0.5 * (1 + trace_norm(prior0 * a - (1 - prior0) * b))


@dataclass(frozen=True)
class AttackModel:
    """A receivers' strategy.

    ``params`` by kind:

    - ``global_povm``: ``povm`` on the full receiver space.
    - ``per_group_quantum_with_classical_across``: ``povms``, one labelled
      POVM per group (outcome labels are class labels; ``None`` reads as 0),
      or ``authorized=True`` for each subprotocol's class measurement.
    - ``local_projective_one_way``: ``angles`` mapping each receiver to
      ``(theta, phi)`` of its measurement basis; the guess is the outcome
      parity.

    ``stage`` is ``"hide"`` (before the sender acts) or ``"reveal"`` (the
    announced ``t`` is known).
    """

    kind: str
    params: dict = field(default_factory=dict)
    stage: str = "hide"

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}; expected one of {ATTACK_KINDS}")
        if self.stage not in ("hide", "reveal"):
            raise ValueError(f"unknown stage {self.stage!r}")
        need = {
            "global_povm": ("povm",),
            "local_projective_one_way": ("angles",),
        }.get(self.kind, ())
        missing = [k for k in need if k not in self.params]
        if missing:
            raise ValueError(f"{self.kind} attack needs parameter(s) {missing}")
        if self.kind == "per_group_quantum_with_classical_across":
            if "povms" not in self.params and not self.params.get("authorized"):
                raise ValueError("per-group attack needs 'povms' or authorized=True")


def qubit_basis(theta, phi):
    """Orthonormal qubit basis with Bloch angles ``(theta, phi)``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    ph = np.exp(1j * phi)
    return np.array([[c, ph * s], [s, -ph * c]])


def _attack_outcomes(scheme, attack):
    """Receiver-space effects and the guess each (t, outcome) produces."""
    m = scheme.m
    if attack.kind == "global_povm":
        povm = attack.params["povm"]
        if povm.dim != scheme.receiver_layout.total_dim:
            raise ValueError(f"POVM dimension {povm.dim} != receiver dimension {scheme.receiver_layout.total_dim}")
        n_k = len(povm.effects)
        return list(povm.effects), lambda t, k: k if t is None else t * n_k + k, n_k

    if attack.kind == "per_group_quantum_with_classical_across":
        if attack.params.get("authorized"):
            povms = [sp.class_povm() for sp in scheme.subprotocols]
        else:
            povms = list(attack.params["povms"])
        if len(povms) != len(scheme.subprotocols):
            raise ValueError("one POVM per group required")
        combos = list(itertools.product(*[range(len(p.effects)) for p in povms]))
        effects = [kron_all(*[povms[j].effects[k] for j, k in enumerate(c)]) for c in combos]
        labels = [tuple(0 if povms[j].labels[k] is None else int(povms[j].labels[k]) for j, k in enumerate(c))
                  for c in combos]

        def guess(t, k):
            return decode(0 if t is None else t, [x % m for x in labels[k]], m)

        return effects, guess, m

    angles = attack.params["angles"]
    bases = [qubit_basis(*angles[lbl]) for lbl in scheme.receivers]
    effects, parities = [], []
    for bits in itertools.product(range(2), repeat=len(bases)):
        v = kron_all(*[bases[i][b] for i, b in enumerate(bits)])
        effects.append(np.outer(v, v.conj()))
        parities.append(sum(bits))

    def guess(t, k):
        return (parities[k] + (0 if t is None else t)) % m

    return effects, guess, m


def _candidate_outcomes(scheme, cand_index, b, effects, stage):
    """List of ``(t or None, k, probability)`` for one candidate."""
    cand = scheme.candidates[b][cand_index]
    out = []
    if stage == "hide":
        rho = np.asarray(reduced_state(cand.state, scheme.receivers).matrix)
        for k, e in enumerate(effects):
            out.append((None, k, max(float(np.real(np.trace(e @ rho))), 0.0)))
        return out
    for br in reveal_branches(scheme, b, cand_index):
        v = br.post_state.amplitudes
        for k, e in enumerate(effects):
            out.append((int(br.t), k, br.probability * max(float(np.vdot(v, e @ v).real), 0.0)))
    return out


def guessing_channel(scheme, attack, trials=None, rng_seed=None, exact=False):
    """Channel from the secret to the attackers' guess.

    ``exact=True`` averages Born probabilities over the candidate ensemble.
    Otherwise ``trials`` rounds are simulated: a uniform secret, a uniform
    candidate, and the measurement outcome drawn from its Born distribution.
    """
    effects, guess, n_guess = _attack_outcomes(scheme, attack)
    n_cols = n_guess * (scheme.m if attack.kind == "global_povm" and attack.stage == "reveal" else 1)
    prior = np.full(scheme.m, 1 / scheme.m)
    tables = {}
    for b in range(scheme.m):
        tables[b] = []
        for ci in range(len(scheme.candidates[b])):
            outs = _candidate_outcomes(scheme, ci, b, effects, attack.stage)
            probs = np.array([p for _, _, p in outs])
            cols = np.array([guess(t, k) for t, k, _ in outs])
            tables[b].append((probs / probs.sum(), cols))

    if exact:
        mat = np.zeros((scheme.m, n_cols))
        for b in range(scheme.m):
            for probs, cols in tables[b]:
                np.add.at(mat[b], cols, probs / len(tables[b]))
        return GuessingChannel(mat, prior)

    if not trials or trials < 1:
        raise ValueError("trials must be a positive integer")
    rng = make_rng(rng_seed)
    secrets = rng.integers(scheme.m, size=trials)
    u = rng.random(trials)
    counts = np.zeros((scheme.m, n_cols))
    for b in range(scheme.m):
        idx = np.flatnonzero(secrets == b)
        if idx.size == 0:
            continue
        cands = rng.integers(len(tables[b]), size=idx.size)
        for ci in np.unique(cands):
            sel = idx[cands == ci]
            probs, cols = tables[b][ci]
            draws = np.minimum(np.searchsorted(np.cumsum(probs), u[sel], side="right"), len(probs) - 1)
            np.add.at(counts[b], cols[draws], 1)
    per_row = counts.sum(axis=1)
    mat = counts / np.where(per_row > 0, per_row, 1)[:, None]
    return GuessingChannel(mat, prior, per_row)


# --- restricted LOCC attacks on a single subprotocol -------------------------


@dataclass(frozen=True)
class LocalAttackResult:
    success: float
    delta: float
    order: tuple
    angles: np.ndarray
    restarts: int
    evaluations: int

    def strategy(self):
        """Angles in degrees keyed by ``(party, outcomes of earlier parties)``."""
        out = {}
        slot = 0
        for r, party in enumerate(self.order):
            for prefix in itertools.product(range(2), repeat=r):
                out[(party, prefix)] = tuple(float(np.degrees(a)) for a in self.angles[slot])
                slot += 1
        return out

    def to_json(self):
        return {
            "success": self.success,
            "delta": self.delta,
            "order": list(self.order),
            "strategy": [
                {"party": p, "after": list(prefix), "theta_deg": a[0], "phi_deg": a[1]}
                for (p, prefix), a in self.strategy().items()
            ],
            "restarts": self.restarts,
            "evaluations": self.evaluations,
        }


def _slot_table(k):
    """``slot[(r, prefix)]`` indexes the measurement of the r-th party after seeing ``prefix``."""
    table, slot = {}, 0
    for r in range(k):
        for prefix in itertools.product(range(2), repeat=r):
            table[(r, prefix)] = slot
            slot += 1
    return table, slot


class _OneWayEvaluator:
    """Batched success probability of sequential one-way local measurements."""

    def __init__(self, subprotocol, order):
        layout = subprotocol.layout
        if any(d != 2 for d in layout.dims):
            raise ValueError("local attacks are implemented for qubit groups only")
        self.k = len(layout.dims)
        self.order = tuple(order)
        pos = [layout.index(lbl) for lbl in self.order]
        slots, self.n_slots = _slot_table(self.k)
        self.outcomes = list(itertools.product(range(2), repeat=self.k))
        # for each outcome string and layout party: (slot, local outcome)
        self.plan = []
        for o in self.outcomes:
            by_party = [None] * self.k
            for r in range(self.k):
                by_party[pos[r]] = (slots[(r, o[:r])], o[r])
            self.plan.append(by_party)
        self.members = np.array([s.amplitudes for s in subprotocol.members])
        self.classes = subprotocol.classes
        self.m = subprotocol.m

    def __call__(self, angles):
        """``angles`` has shape (batch, n_slots, 2); returns success per batch row."""
        th, ph = angles[..., 0], angles[..., 1]
        c, s, e = np.cos(th / 2), np.sin(th / 2), np.exp(1j * ph)
        basis = np.stack([np.stack([c, e * s], -1), np.stack([s, -e * c], -1)], -2)  # (B, slots, out, 2)
        vecs = []
        for by_party in self.plan:
            v = None
            for slot, out in by_party:
                local = basis[:, slot, out, :]
                v = local if v is None else (v[:, :, None] * local[:, None, :]).reshape(v.shape[0], -1)
            vecs.append(v)
        vecs = np.stack(vecs, 1)  # (B, outcomes, dim)
        amp = np.abs(np.einsum("bod,md->bom", vecs.conj(), self.members)) ** 2
        per_class = np.stack([amp[:, :, list(c)].mean(-1) for c in self.classes], -1)
        return per_class.max(-1).sum(-1) / self.m


def local_success(subprotocol, order, angles):
    """Success probability of one one-way strategy (angles in radians, shape (slots, 2))."""
    ev = _OneWayEvaluator(subprotocol, order)
    return float(ev(np.asarray(angles, dtype=float)[None])[0])


def _coordinate_ascent(ev, x, grids, max_passes):
    best = float(ev(x[None])[0])
    evals = 1
    for _ in range(max_passes):
        improved = False
        for slot in range(x.shape[0]):
            for a in range(2):
                vals = grids[a](x[slot, a])
                trial = np.repeat(x[None], len(vals), 0)
                trial[:, slot, a] = vals
                scores = ev(trial)
                evals += len(vals)
                i = int(np.argmax(scores))
                if scores[i] > best + 1e-12:
                    best = float(scores[i])
                    x = trial[i]
                    improved = True
        if not improved:
            break
    return best, x, evals


def optimize_local_attack(subprotocol, restarts=64, rng_seed=0, coarse_step_deg=10.0, fine_step_deg=0.5,
                          fine_span_deg=10.0, max_passes=50):
    """Best class-discrimination success found for one-way local projective strategies.

    Each party measures its qubit in a basis chosen from the outcomes of
    the parties before it, and the final guess is the likelier class.
    Coordinate ascent on a coarse angle grid from ``restarts`` random
    starts, cycling through party orders, then a fine local grid around
    the best point. The value is a lower bound on what LOCC achieves.
    """
    k = len(subprotocol.layout.dims)
    if k > 3:
        raise ValueError(f"groups of {k} parties are not supported (max 3)")
    rng = make_rng(rng_seed)
    orders = list(itertools.permutations(subprotocol.group_labels))
    coarse = np.radians(coarse_step_deg)
    theta_grid = np.arange(0, np.pi + 1e-9, coarse)
    phi_grid = np.arange(0, 2 * np.pi - 1e-9, coarse)
    coarse_grids = (lambda cur: theta_grid, lambda cur: phi_grid)
    fine = np.radians(fine_step_deg) * np.arange(-round(fine_span_deg / fine_step_deg),
                                                   round(fine_span_deg / fine_step_deg) + 1)
    fine_grids = (lambda cur: cur + fine, lambda cur: cur + fine)

    evaluators = {o: _OneWayEvaluator(subprotocol, o) for o in orders}
    n_slots = evaluators[orders[0]].n_slots
    best = (-1.0, None, None)
    evals = 0
    for r in range(restarts):
        order = orders[r % len(orders)]
        x = np.stack([rng.uniform(0, np.pi, n_slots), rng.uniform(0, 2 * np.pi, n_slots)], -1)
        score, x, n = _coordinate_ascent(evaluators[order], x, coarse_grids, max_passes)
        evals += n
        if score > best[0] + 1e-12:
            best = (score, order, x)
    score, order, x = best
    score, x, n = _coordinate_ascent(evaluators[order], x, fine_grids, 10 * max_passes)
    evals += n
    m = subprotocol.m
    delta = (m * score - 1) / (m - 1)
    return LocalAttackResult(score, delta, order, x, restarts, evals)
