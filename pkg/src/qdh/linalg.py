"""Dense complex linear algebra kernel.

Matrices are plain ``numpy`` complex arrays. This module adds the few
operations the protocol code needs on top of them: a capped Kronecker
product, partial traces over labelled tensor factors, a Jacobi
eigensolver for Hermitian matrices and the trace norm built on it.
"""

import numpy as np

DEFAULT_DIM_CAP = 2**14
ALGEBRA_TOL = 1e-12
EIGEN_TOL = 1e-9
JACOBI_TOL = 1e-14


class DimensionError(ValueError):
    """Shapes or subsystem dimensions are inconsistent."""


class ContractViolation(ValueError):
    """An input breaks a documented precondition (not Hermitian, not normalized, ...)."""


def as_matrix(m):
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def is_hermitian(m, tol=ALGEBRA_TOL):
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def kron(a, b, cap=DEFAULT_DIM_CAP):
    """Kronecker product ``a ⊗ b``; raises if either side would exceed ``cap``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        if a.size * b.size > cap:
            raise DimensionError(f"dimension {a.size * b.size} exceeds cap {cap}")
        return np.kron(a, b)
    a, b = as_matrix(a), as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > cap or cols > cap:
        raise DimensionError(f"dimension {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def kron_all(*factors, cap=DEFAULT_DIM_CAP):
    out = np.ones(1, dtype=complex) if np.ndim(factors[0]) == 1 else np.ones((1, 1), dtype=complex)
    for f in factors:
        out = kron(out, f, cap=cap)
    return out


def _einsum_letters(n):
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise DimensionError(f"too many subsystems ({n})")
    return letters[:n], letters[n : 2 * n]


def partial_trace(m, dims, keep):
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` gives the local dimension of each tensor factor, ``keep`` the
    indices of the factors to retain. Kept factors come out in their
    original order regardless of the order of ``keep``.
    """
    a = as_matrix(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims)) if dims else 1
    if a.shape != (total, total):
        raise DimensionError(f"matrix shape {a.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    rows, cols = _einsum_letters(n)
    cols = "".join(cols[i] if i in keep else rows[i] for i in range(n))
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    t = np.einsum(f"{rows}{cols}->{out}", a.reshape(dims + dims))
    side = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(side, side)


def _round_robin(n):
    """Pairings of ``range(n)`` (n even) covering every pair once over n-1 rounds."""
    idx = list(range(n))
    rounds = []
    for _ in range(n - 1):
        p, q = [], []
        for i in range(n // 2):
            x, y = idx[i], idx[n - 1 - i]
            p.append(min(x, y))
            q.append(max(x, y))
        rounds.append((np.array(p), np.array(q)))
        idx = [idx[0], idx[-1]] + idx[1:-1]
    return rounds


def _offdiag_norm(a):
    off = a - np.diag(np.diag(a))
    return np.linalg.norm(off)


def hermitian_eig(m, tol=JACOBI_TOL, max_sweeps=100):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Rotations are scheduled in round-robin order so that each step rotates
    ``n/2`` disjoint index pairs at once. Sweeps stop once the off-diagonal
    Frobenius mass falls below ``tol * max(1, ||m||_F)``.

    Returns
    -------
    eigenvalues : ndarray of float, sorted descending
    eigenvectors : ndarray, column ``i`` belongs to ``eigenvalues[i]``
    """
    a = as_matrix(m)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionError(f"square matrix required, got {a.shape}")
    if not is_hermitian(a):
        raise ContractViolation("hermitian_eig requires a Hermitian matrix")
    a = (a + a.conj().T) / 2
    v = np.eye(n, dtype=complex)
    if n == 1:
        return np.array([a[0, 0].real]), v

    padded = n + (n % 2)
    rounds = []
    for p, q in _round_robin(padded):
        ok = q < n
        rounds.append((p[ok], q[ok]))

    threshold = tol * max(1.0, np.linalg.norm(a))
    for _ in range(max_sweeps):
        if _offdiag_norm(a) < threshold:
            break
        for p, q in rounds:
            apq = a[p, q]
            mag = np.abs(apq)
            active = mag > 0
            safe = np.where(active, mag, 1.0)
            phase = np.where(active, apq / safe, 1.0)
            zeta = (a[q, q].real - a[p, p].real) / (2 * safe)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            t = np.where(active, t, 0.0)
            c = 1 / np.sqrt(1 + t**2)
            s = t * c
            # 2x2 block of the unitary: diag(1, conj(phase)) @ [[c, s], [-s, c]]
            wpp, wpq = c, s
            wqp, wqq = -s * phase.conj(), c * phase.conj()

            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = ap * wpp + aq * wqp
            a[:, q] = ap * wpq + aq * wqq
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = np.conj(wpp)[:, None] * rp + np.conj(wqp)[:, None] * rq
            a[q, :] = np.conj(wpq)[:, None] * rp + np.conj(wqq)[:, None] * rq
            a[p, q] = 0
            a[q, p] = 0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real

            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * wpp + vq * wqp
            v[:, q] = vp * wpq + vq * wqq
    else:
        if _offdiag_norm(a) >= threshold:
            raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    vals = np.diag(a).real
    order = np.argsort(-vals, kind="stable")
    return vals[order], v[:, order]


def trace_norm(m):
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    vals, _ = hermitian_eig(m)
    return float(np.sum(np.abs(vals)))


def matrix_function(m, f):
    """Apply ``f`` to the spectrum of Hermitian ``m``."""
    vals, vecs = hermitian_eig(m)
    return (vecs * f(vals)) @ vecs.conj().T
