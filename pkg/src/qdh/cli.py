"""``qdh`` command line: verify, simulate and attack hiding scenarios.

Exit codes: 0 success, 1 a verification check failed, 2 usage or scenario error.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fiveparty
from .linalg import DimensionError
from .measurement import (
    KrausInstrument,
    Povm,
    embed_operator,
    make_rng,
    random_povm,
    spawn_seeds,
    validate,
)
from .protocol import (
    composite_ensemble_state,
    decode,
    ensemble_state,
    group_label_distribution,
    reveal_branches,
    burn_branches,
    scheme_from_description,
    verify_burn,
    verify_hiding,
)
from .security import (
    AttackModel,
    BinaryChannel,
    divincenzo_bound,
    guessing_channel,
    helstrom,
    optimize_local_attack,
    xor_amplify,
)
from .upb import check_orthogonality, check_unextendible, witness_overlaps

REPORT_SCHEMA = "report-v1"
STAGES = ("hide", "reveal", "burn", "attack")
HIDING_TOL = 1e-12
BURN_TOL = 1e-12
WITNESS_TOL = 1e-10


class ScenarioError(ValueError):
    """Malformed scenario file or option; maps to exit code 2."""


@dataclass
class Scenario:
    scheme: dict
    stage: str = "reveal"
    attack: dict = field(default_factory=dict)
    trials: int = 0
    rng_seed: object = None
    outputs: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "scheme": self.scheme,
            "stage": self.stage,
            "attack": self.attack,
            "trials": self.trials,
            "rng_seed": self.rng_seed,
            "outputs": self.outputs,
        }


_TOP_FIELDS = {"scheme", "stage", "attack", "trials", "rng_seed", "outputs"}
_SCHEME_FIELDS = {"name", "theta", "n_blocks", "description"}
_ATTACK_FIELDS = {"kind", "target", "stage", "settings"}
_OUTPUT_FIELDS = {"report", "csv"}


def _reject_unknown(doc, allowed, where):
    if not isinstance(doc, dict):
        raise ScenarioError(f"field '{where}': expected an object")
    extra = sorted(set(doc) - allowed)
    if extra:
        raise ScenarioError(f"field '{where}': unknown field(s) {extra}")


def parse_scenario(text, source="<scenario>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    _reject_unknown(doc, _TOP_FIELDS, "<root>")
    if "scheme" not in doc:
        raise ScenarioError("field 'scheme': required")
    scheme = doc["scheme"]
    _reject_unknown(scheme, _SCHEME_FIELDS, "scheme")
    if "description" in scheme:
        if "name" in scheme or "theta" in scheme:
            raise ScenarioError("field 'scheme': give either 'name'/'theta' or 'description'")
    elif scheme.get("name") != fiveparty.SCHEME_NAME:
        raise ScenarioError(f"field 'scheme.name': unknown scheme {scheme.get('name')!r}")
    if "theta" in scheme and not isinstance(scheme["theta"], (int, float)):
        raise ScenarioError("field 'scheme.theta': expected a number")
    n_blocks = scheme.get("n_blocks", 1)
    if not isinstance(n_blocks, int) or n_blocks < 1:
        raise ScenarioError("field 'scheme.n_blocks': expected a positive integer")
    stage = doc.get("stage", "reveal")
    if stage not in STAGES:
        raise ScenarioError(f"field 'stage': expected one of {list(STAGES)}, got {stage!r}")
    attack = doc.get("attack", {})
    _reject_unknown(attack, _ATTACK_FIELDS, "attack")
    trials = doc.get("trials", 0)
    if not isinstance(trials, int) or trials < 0:
        raise ScenarioError("field 'trials': expected a nonnegative integer")
    seed = doc.get("rng_seed")
    if seed is not None and (not isinstance(seed, int) or not 0 <= seed < 2**64):
        raise ScenarioError("field 'rng_seed': expected an unsigned 64-bit integer")
    outputs = doc.get("outputs", {})
    _reject_unknown(outputs, _OUTPUT_FIELDS, "outputs")
    return Scenario(scheme, stage, attack, trials, seed, outputs)


def load_scenario(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text, str(path))


def _apply_overrides(scn, args):
    if args.theta is not None:
        if "description" in scn.scheme:
            raise ScenarioError("--theta cannot override a scheme description")
        scn.scheme["theta"] = args.theta
    if args.trials is not None:
        scn.trials = args.trials
    if args.blocks is not None:
        scn.scheme["n_blocks"] = args.blocks
    if args.seed is not None:
        scn.rng_seed = args.seed
    return scn


def _build_scheme(scn):
    try:
        if "description" in scn.scheme:
            return scheme_from_description(scn.scheme["description"])
        return fiveparty.five_party_scheme(scn.scheme.get("theta", fiveparty.DEFAULT_THETA))
    except (ValueError, KeyError, TypeError) as exc:
        raise ScenarioError(f"field 'scheme': {exc}") from None


def _upb_thetas(scn):
    if "description" in scn.scheme:
        return [s.get("theta", fiveparty.DEFAULT_THETA)
                for s in scn.scheme["description"].get("subprotocols", []) if s.get("name") == "upb"]
    return [scn.scheme.get("theta", fiveparty.DEFAULT_THETA)]


def _require_seed(scn):
    if scn.rng_seed is None:
        raise ScenarioError("a seed is required: set 'rng_seed' or pass --seed")
    return scn.rng_seed


def _check(name, passed, **details):
    return {"name": name, "passed": bool(passed), **details}


# --- verify ------------------------------------------------------------------


def cmd_verify(scn):
    scheme = _build_scheme(scn)
    checks = []
    hid = verify_hiding(scheme, HIDING_TOL)
    checks.append(_check("hiding", hid.passed, max_trace_distance=hid.max_pairwise_trace_distance, tol=HIDING_TOL))
    checks.append(_check("decode_consistency", not hid.decode_violations,
                         violations=[list(v) for v in hid.decode_violations]))
    burn = verify_burn(scheme, BURN_TOL)
    checks.append(_check("burn", burn.passed, min_fidelity=burn.min_cross_secret_fidelity,
                         max_ensemble_distance=burn.max_ensemble_distance, tol=BURN_TOL))
    for name, inst in (("reveal_instrument", scheme.sender_reveal), ("burn_instrument", scheme.sender_burn)):
        problems = validate(inst)
        full = Povm(tuple(embed_operator(e, scheme.layout, [scheme.sender]) for e in inst.povm().effects))
        problems += [f"embedded: {p}" for p in validate(full)]
        checks.append(_check(name, not problems, problems=problems))
    for theta in _upb_thetas(scn):
        fam = fiveparty.upb_family(theta)
        orth = check_orthogonality(fam)
        checks.append(_check("upb_orthogonality", orth.orthogonal, theta=theta,
                             witness=None if orth.witness is None else list(orth.witness)))
        unext = check_unextendible(fam)
        checks.append(_check("upb_unextendible", unext.unextendible, theta=theta,
                             assignments_checked=unext.assignments_checked))
        worst = 0.0
        flips = True
        for k in range(len(fam)):
            r = check_unextendible(fam.without(k))
            flips &= not r.unextendible
            if r.witness is not None:
                worst = max(worst, float(np.max(witness_overlaps(fam.without(k), r.witness))))
        checks.append(_check("upb_minimality", flips and worst <= WITNESS_TOL, theta=theta,
                             max_witness_overlap=worst))
    n_blocks = scn.scheme.get("n_blocks", 1)
    if n_blocks > 1:
        n = min(n_blocks, 2)
        ref = composite_ensemble_state(scheme, [0] * n)
        worst = 0.0
        for bits in np.ndindex(*([scheme.m] * n)):
            worst = max(worst, float(np.max(np.abs(composite_ensemble_state(scheme, bits) - ref))))
        checks.append(_check("parallel_hiding", worst <= HIDING_TOL, blocks_checked=n, max_entry_difference=worst))
    ok = all(c["passed"] for c in checks)
    return {"passed": ok, "checks": checks, "failed": [c["name"] for c in checks if not c["passed"]]}, 0 if ok else 1


# --- simulate ----------------------------------------------------------------


def _draw(rng, probs):
    cdf = np.cumsum(probs)
    return min(int(np.searchsorted(cdf / cdf[-1], rng.random(), side="right")), len(probs) - 1)


def _branch_tables(scheme, stage):
    """Per secret and candidate: [(outcome index, probability, [(labels, p), ...]), ...]."""
    branch_fn = reveal_branches if stage == "reveal" else burn_branches
    labels = scheme.sender_reveal.outcome_labels if stage == "reveal" else scheme.sender_burn.outcome_labels
    tables = {}
    for b in range(scheme.m):
        tables[b] = []
        for ci in range(len(scheme.candidates[b])):
            rows = []
            for br in branch_fn(scheme, b, ci):
                dist = group_label_distribution(scheme, br.post_state)
                rows.append((labels.index(br.t), br.probability, dist))
            tables[b].append(rows)
    return tables


def cmd_simulate(scn):
    seed = _require_seed(scn)
    if scn.stage not in ("reveal", "burn"):
        raise ScenarioError(f"field 'stage': simulate supports 'reveal' or 'burn', got {scn.stage!r}")
    if scn.trials < 1:
        raise ScenarioError("field 'trials': simulate needs at least one trial")
    scheme = _build_scheme(scn)
    n_blocks = scn.scheme.get("n_blocks", 1)
    tables = _branch_tables(scheme, scn.stage)
    rng = make_rng(seed)
    n_out = len(scheme.sender_reveal.outcome_labels if scn.stage == "reveal" else scheme.sender_burn.outcome_labels)
    t_counts = np.zeros(n_out, dtype=int)
    branch_correct = np.zeros(n_out, dtype=int)
    correct_blocks = 0
    all_correct_trials = 0
    undecodable = 0
    for _ in range(scn.trials):
        secrets = rng.integers(scheme.m, size=n_blocks)
        trial_ok = True
        for b in secrets:
            b = int(b)
            rows = tables[b][int(rng.integers(len(tables[b])))]
            t, _, dist = rows[_draw(rng, [p for _, p, _ in rows])]
            labels = dist[_draw(rng, [p for _, p in dist])][0]
            t_counts[t] += 1
            if any(x is None for x in labels) or t >= scheme.m:
                undecodable += 1
                trial_ok = False
                continue
            got = decode(t, labels, scheme.m)
            if got == b:
                correct_blocks += 1
                branch_correct[t] += 1
            else:
                trial_ok = False
        all_correct_trials += trial_ok
    total = scn.trials * n_blocks
    acc = correct_blocks / total
    sigma = math.sqrt(0.25 / total)
    return {
        "stage": scn.stage,
        "trials": scn.trials,
        "n_blocks": n_blocks,
        "decode_accuracy": acc,
        "all_blocks_correct_fraction": all_correct_trials / scn.trials,
        "undecodable_blocks": undecodable,
        "binomial_sigma_at_half": sigma,
        "sender_outcomes": [
            {
                "outcome": str(lbl),
                "count": int(t_counts[i]),
                "frequency": float(t_counts[i] / total),
                "decode_accuracy": float(branch_correct[i] / t_counts[i]) if t_counts[i] else None,
            }
            for i, lbl in enumerate(
                scheme.sender_reveal.outcome_labels if scn.stage == "reveal" else scheme.sender_burn.outcome_labels)
        ],
    }, 0


# --- attack ------------------------------------------------------------------


def _amplification_rows(delta, max_blocks, entropy=1.0):
    return [{"n": n, "amplified_delta": xor_amplify(delta, n), "info_bound_bits": xor_amplify(delta, n) * entropy}
            for n in range(1, max_blocks + 1)]


def _channel_summary(channel):
    out = {"channel": channel.to_json(), "mutual_info_bits": channel.mutual_information()}
    if channel.matrix.shape == (2, 2):
        out["bias"] = divincenzo_bound(channel.as_binary()).to_json()
    return out


def _scheme_helstrom(scheme, stage):
    if stage == "hide":
        return helstrom(ensemble_state(scheme, 0), ensemble_state(scheme, 1))
    # conditional on the announced t
    total = 0.0
    d = scheme.receiver_layout.total_dim
    for t in range(scheme.m):
        joint = []
        for b in range(scheme.m):
            acc = np.zeros((d, d), dtype=complex)
            for ci in range(len(scheme.candidates[b])):
                for br in reveal_branches(scheme, b, ci):
                    if br.t == t:
                        v = br.post_state.amplitudes
                        acc += br.probability * np.outer(v, v.conj())
            joint.append(acc / len(scheme.candidates[b]))
        weights = [np.trace(j).real / scheme.m for j in joint]
        pt = sum(weights)
        if pt > 0 and min(weights) > 0:
            rho = [j / np.trace(j).real for j in joint]
            total += pt * helstrom(rho[0], rho[1], weights[0] / pt)
        elif pt > 0:
            total += pt
    return total


def cmd_attack(scn):
    seed = _require_seed(scn)
    att = scn.attack
    if "kind" not in att:
        raise ScenarioError("field 'attack.kind': required")
    kind = att["kind"]
    settings = dict(att.get("settings", {}))
    target = att.get("target", "scheme")
    stage = att.get("stage", "reveal" if scn.stage == "reveal" else "hide")
    if stage not in ("hide", "reveal"):
        raise ScenarioError(f"field 'attack.stage': expected 'hide' or 'reveal', got {stage!r}")
    max_blocks = int(settings.pop("max_blocks", 20))
    s_attack, s_sim = spawn_seeds(seed, 2)
    result = {"kind": kind, "target": target, "stage": stage}

    if target in ("bell", "upb"):
        if kind != "local_projective_one_way":
            raise ScenarioError("field 'attack.kind': subprotocol targets support local_projective_one_way only")
        theta = scn.scheme.get("theta", fiveparty.DEFAULT_THETA)
        sp = fiveparty.bell_subprotocol() if target == "bell" else fiveparty.upb_subprotocol(theta)
        try:
            opt = optimize_local_attack(sp, rng_seed=s_attack, **settings)
        except TypeError as exc:
            raise ScenarioError(f"field 'attack.settings': {exc}") from None
        ch = BinaryChannel(opt.success, 1 - opt.success)
        result.update(
            optimizer=opt.to_json(),
            helstrom=helstrom(*sp.mixtures),
            bias=divincenzo_bound(ch, n_blocks=max_blocks).to_json(),
            amplification=_amplification_rows(opt.delta, max_blocks),
        )
        return result, 0, result["amplification"]

    if target != "scheme":
        raise ScenarioError(f"field 'attack.target': unknown target {target!r}")
    scheme = _build_scheme(scn)
    rng = make_rng(s_attack)
    if kind == "global_povm":
        n_out = int(settings.pop("n_outcomes", 2))
        povm = random_povm(scheme.receiver_layout.total_dim, n_out, rng)
        model = AttackModel(kind, {"povm": povm}, stage)
    elif kind == "per_group_quantum_with_classical_across":
        if settings.pop("authorized", False):
            model = AttackModel(kind, {"authorized": True}, stage)
        else:
            n_out = int(settings.pop("n_outcomes", 2))
            povms = []
            for sp in scheme.subprotocols:
                p = random_povm(sp.layout.total_dim, n_out, rng)
                povms.append(Povm(p.effects, tuple(k % scheme.m for k in range(n_out))))
            model = AttackModel(kind, {"povms": povms}, stage)
    elif kind == "local_projective_one_way":
        angles = {lbl: (float(rng.uniform(0, np.pi)), float(rng.uniform(0, 2 * np.pi))) for lbl in scheme.receivers}
        model = AttackModel(kind, {"angles": angles}, stage)
    else:
        raise ScenarioError(f"field 'attack.kind': unknown attack kind {kind!r}")
    if settings:
        raise ScenarioError(f"field 'attack.settings': unknown setting(s) {sorted(settings)}")

    exact = guessing_channel(scheme, model, exact=True)
    result["exact"] = _channel_summary(exact)
    if scn.trials > 0:
        result["sampled"] = _channel_summary(guessing_channel(scheme, model, scn.trials, s_sim))
    result["helstrom"] = _scheme_helstrom(scheme, stage)
    delta = result["exact"].get("bias", {}).get("delta")
    result["amplification"] = None if delta is None else _amplification_rows(delta, max_blocks)
    return result, 0, result["amplification"]


# --- entry point -------------------------------------------------------------


def render_report(command, scn, body):
    doc = {"schema": REPORT_SCHEMA, "command": command, "scenario": scn.to_json(), "result": body}
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    return buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(prog="qdh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify", "simulate", "attack"):
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides rng_seed)")
        p.add_argument("--out", help="directory for report.json and CSV sweeps")
        p.add_argument("--theta", type=float)
        p.add_argument("--trials", type=int)
        p.add_argument("--blocks", type=int)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        scn = _apply_overrides(load_scenario(args.scenario), args)
        if scn.rng_seed is not None and not 0 <= scn.rng_seed < 2**64:
            raise ScenarioError("--seed must be an unsigned 64-bit integer")
        rows = None
        if args.command == "verify":
            body, code = cmd_verify(scn)
        elif args.command == "simulate":
            body, code = cmd_simulate(scn)
        else:
            body, code, rows = cmd_attack(scn)
    except (ScenarioError, DimensionError) as exc:
        print(f"qdh {args.command}: {exc}", file=sys.stderr)
        return 2
    report = render_report(args.command, scn, body)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / scn.outputs.get("report", "report.json")).write_text(report)
        if rows:
            (out / scn.outputs.get("csv", "amplification.csv")).write_text(render_csv(rows))
    sys.stdout.write(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
