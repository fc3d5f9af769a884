"""Closed-form kernels for SO(3) and its Lie algebra.

Rotations are plain 3x3 numpy arrays, algebra elements are length-3 arrays
in rotation-vector coordinates.  All functions are pure and stateless, so
they are safe to call concurrently.
"""

import numpy as np

# Switchover angle between the closed-form trigonometric coefficients and
# their Taylor expansions; both branches agree to ~1e-12 at the threshold.
_SMALL_ANGLE = 1e-4

ROTATION_TOL = 1e-9


def hat(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of ``v``, so that ``hat(v) @ w == cross(v, w)``."""
    v = np.asarray(v, dtype=float)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def vee(m: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Inverse of :func:`hat`.  Rejects input whose symmetric part exceeds ``tol``."""
    m = np.asarray(m, dtype=float)
    if np.linalg.norm(m + m.T) > tol:
        raise ValueError("vee: input matrix is not skew-symmetric")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def is_rotation(r: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    """True when ``r`` is orthogonal with unit determinant within ``tol``."""
    r = np.asarray(r)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        return False
    return (
        np.linalg.norm(r.T @ r - np.eye(3)) <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


def check_rotation(r: np.ndarray, tol: float = ROTATION_TOL) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if not is_rotation(r, tol):
        raise ValueError("matrix is not a rotation within tolerance")
    return r


def project_rotation(m: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix (polar factor) of an almost-orthogonal matrix."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=float))
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        r = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return r


def exp_so3(v: np.ndarray) -> np.ndarray:
    """Rodrigues formula for the matrix exponential of ``hat(v)``."""
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(v)
    a = hat(v)
    if th < _SMALL_ANGLE:
        c0 = 1.0 - th**2 / 6.0 + th**4 / 120.0
        c1 = 0.5 - th**2 / 24.0 + th**4 / 720.0
    else:
        c0 = np.sin(th) / th
        c1 = (1.0 - np.cos(th)) / th**2
    return np.eye(3) + c0 * a + c1 * (a @ a)


def log_so3(r: np.ndarray) -> np.ndarray:
    """Principal logarithm of a rotation matrix as a rotation vector.

    The returned vector has norm <= pi.  Near pi the axis is recovered from
    the symmetric part of ``r``, which stays well conditioned where the
    antisymmetric part degenerates.
    """
    r = check_rotation(r)
    c = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(c)
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]]) / 2.0
    if theta < _SMALL_ANGLE:
        return w * (1.0 + theta**2 / 6.0 + 7.0 * theta**4 / 360.0)
    if theta < np.pi - 1e-2:
        return w * (theta / np.sin(theta))
    # Near-pi branch: sym(r) = cos(th) I + (1 - cos(th)) a a^T.
    outer = ((r + r.T) / 2.0 - c * np.eye(3)) / (1.0 - c)
    i = int(np.argmax(np.diag(outer)))
    axis = outer[:, i] / np.linalg.norm(outer[:, i])
    if axis @ w < 0.0:
        axis = -axis
    # |w| = sin(theta); recovering theta from it avoids the arccos precision
    # loss at flat cosine.
    theta = np.pi - np.arcsin(np.clip(np.linalg.norm(w), 0.0, 1.0))
    return theta * axis


def ad(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Lie bracket [x, y] on so(3), i.e. the cross product."""
    return np.cross(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def Ad(r: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Adjoint action of a rotation on an algebra element: ``r @ y``."""
    return check_rotation(r) @ np.asarray(y, dtype=float)


def dexp_matrix(eta: np.ndarray) -> np.ndarray:
    """Matrix of the right-trivialized tangent of exp at ``eta``."""
    eta = np.asarray(eta, dtype=float)
    th = np.linalg.norm(eta)
    a = hat(eta)
    if th < _SMALL_ANGLE:
        c1 = 0.5 - th**2 / 24.0 + th**4 / 720.0
        c2 = 1.0 / 6.0 - th**2 / 120.0 + th**4 / 5040.0
    else:
        c1 = (1.0 - np.cos(th)) / th**2
        c2 = (th - np.sin(th)) / th**3
    return np.eye(3) + c1 * a + c2 * (a @ a)


def dexpinv_matrix(eta: np.ndarray) -> np.ndarray:
    """Matrix of the inverse of the right-trivialized tangent of exp."""
    eta = np.asarray(eta, dtype=float)
    th = np.linalg.norm(eta)
    if th >= 2.0 * np.pi:
        raise ValueError("dexpinv: |eta| must be below 2*pi")
    a = hat(eta)
    if th < _SMALL_ANGLE:
        c = 1.0 / 12.0 + th**2 / 720.0 + th**4 / 30240.0
    else:
        c = (1.0 - 0.5 * th * np.sin(th) / (1.0 - np.cos(th))) / th**2
    return np.eye(3) - 0.5 * a + c * (a @ a)


def dexp(eta: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Right-trivialized tangent of exp applied to ``zeta``."""
    return dexp_matrix(eta) @ np.asarray(zeta, dtype=float)


def dexpinv(eta: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dexp` in its second argument."""
    return dexpinv_matrix(eta) @ np.asarray(zeta, dtype=float)


def bch_quadratic(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Truncated series for ``log_so3(exp_so3(x) @ exp_so3(y))``.

    Keeps the bracket terms through fourth order.  Inputs must have norm at
    most 1 to stay comfortably inside the series' validity region.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.linalg.norm(x) > 1.0 or np.linalg.norm(y) > 1.0:
        raise ValueError("bch_quadratic: input norms must be <= 1")
    xy = np.cross(x, y)
    return (
        x
        + y
        + 0.5 * xy
        + (np.cross(x, xy) - np.cross(y, xy)) / 12.0
        - np.cross(x, np.cross(y, xy)) / 24.0
    )
