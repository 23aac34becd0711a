"""The five-receiver construction for the partition {{A,B},{C,D,E}}.

Group AB hides its label in Bell-state classes, group CDE in classes of
the three-qubit product basis ``{|000>, |1ēe>, |e1ē>, |ēe1>}`` with
``e = cos(theta)|0> + sin(theta)|1>``.
"""

import math

import numpy as np

from .protocol import Subprotocol, build_scheme
from .states import Partition, PureState, SystemLayout
from .upb import ProductStateSet

DEFAULT_THETA = math.pi / 4
SCHEME_NAME = "fiveparty-v1"
GROUPS = (("A", "B"), ("C", "D", "E"))

_S = 1 / math.sqrt(2)
BELL_VECTORS = {
    "phi+": np.array([_S, 0, 0, _S]),
    "phi-": np.array([_S, 0, 0, -_S]),
    "psi+": np.array([0, _S, _S, 0]),
    "psi-": np.array([0, _S, -_S, 0]),
}
# class 0 = {psi-, phi+}, class 1 = {psi+, phi-}
BELL_ORDER = ("psi-", "phi+", "psi+", "phi-")


def bell_state(name, labels=GROUPS[0]):
    return PureState(SystemLayout.qubits(labels), BELL_VECTORS[name])


def bell_subprotocol(labels=GROUPS[0]):
    members = tuple(bell_state(n, labels) for n in BELL_ORDER)
    return Subprotocol("bell", tuple(labels), members, ((0, 1), (2, 3)))


def check_theta(theta):
    theta = float(theta)
    if not 0 < theta < math.pi / 2:
        raise ValueError(
            f"theta={theta} must lie strictly inside (0, pi/2); "
            "at the boundary e collides with the computational basis {|0>, |1>}"
        )
    return theta


def e_vectors(theta=DEFAULT_THETA):
    """``(e, ē)`` with ``ē`` orthogonal to ``e``."""
    theta = check_theta(theta)
    e = np.array([math.cos(theta), math.sin(theta)], dtype=complex)
    ebar = np.array([math.sin(theta), -math.cos(theta)], dtype=complex)
    return e, ebar


def upb_family(theta=DEFAULT_THETA):
    """The four product members, in order ``|000>, |1ēe>, |e1ē>, |ēe1>``."""
    e, eb = e_vectors(theta)
    zero = np.array([1, 0], dtype=complex)
    one = np.array([0, 1], dtype=complex)
    return ProductStateSet((2, 2, 2), ((zero, zero, zero), (one, eb, e), (e, one, eb), (eb, e, one)))


def upb_subprotocol(theta=DEFAULT_THETA, labels=GROUPS[1]):
    fam = upb_family(theta)
    layout = SystemLayout.qubits(labels)
    members = tuple(PureState.product(layout, s) for s in fam.states)
    return Subprotocol("upb", tuple(labels), members, ((0, 1), (2, 3)))


def five_party_scheme(theta=DEFAULT_THETA):
    """Two candidate families per secret; reveal in the computational basis, burn in {|+>, |->}."""
    partition = Partition(GROUPS)
    return build_scheme(partition, [bell_subprotocol(), upb_subprotocol(theta)], burn="fourier")


def authorized_group_measurement(group, theta=DEFAULT_THETA):
    """Nonlocal measurement of a group's class label.

    AB: Bell measurement coarse-grained to the two classes. CDE: projectors
    onto each class span plus the complement (outcome ``None``).
    """
    key = "".join(group) if not isinstance(group, str) else group
    if key == "AB":
        return bell_subprotocol().class_povm()
    if key == "CDE":
        return upb_subprotocol(theta).class_povm()
    raise ValueError(f"unknown group {group!r}; expected 'AB' or 'CDE'")


def named_subprotocol(spec, labels):
    """Subprotocol from a ``{"name": ..., ...}`` description, placed on ``labels``."""
    spec = dict(spec)
    name = spec.pop("name")
    if name == "bell":
        if spec:
            raise ValueError(f"bell subprotocol takes no parameters, got {sorted(spec)}")
        return bell_subprotocol(tuple(labels))
    if name == "upb":
        theta = spec.pop("theta", DEFAULT_THETA)
        if spec:
            raise ValueError(f"unknown upb parameter(s): {sorted(spec)}")
        return upb_subprotocol(theta, tuple(labels))
    raise ValueError(f"unknown subprotocol {name!r}")
