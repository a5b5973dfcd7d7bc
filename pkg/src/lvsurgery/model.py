"""Two-predator / one-prey Lotka-Volterra system in three dimensions.

    dX/dt = X - X*Y + C*X**2 - A*Z*X**2
    dY/dt = -Y + X*Y
    dZ/dt = -B*Z + A*Z*X**2

with A, B, C >= 0.  This module holds the right-hand side, its Jacobian,
the closed-form equilibria and their spectra, an independent cubic-root
eigen-solver used to cross-check them, and the slow manifold geometry.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

LABELS = ("Ss1", "Ss2", "Ss3", "Ss4", "Ss5")

P3_TOL = 1e-9
REAL_TOL = 1e-12
EIGVEC_RTOL = 1e-8


class DomainError(ValueError):
    """Input outside the domain of an operation."""


@dataclass(frozen=True)
class Params:
    """Parameter triple (A, B, C); all must be finite and nonnegative."""

    A: float
    B: float
    C: float

    def __post_init__(self):
        for name in ("A", "B", "C"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0:
                raise DomainError(f"parameter {name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def ratio(self) -> float | None:
        """B/A, or None when A == 0."""
        if self.A == 0.0:
            return None
        return self.B / self.A

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C}


@dataclass(frozen=True)
class State:
    """A phase-space point (X, Y, Z)."""

    X: float
    Y: float
    Z: float

    def __post_init__(self):
        for name in ("X", "Y", "Z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"state component {name} is not finite: {v!r}")
            object.__setattr__(self, name, v)

    def __iter__(self) -> Iterator[float]:
        return iter((self.X, self.Y, self.Z))

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])

    def in_P3(self, tol: float = P3_TOL) -> bool:
        return self.X >= -tol and self.Y >= -tol and self.Z >= -tol

    def norm_inf(self) -> float:
        return max(abs(self.X), abs(self.Y), abs(self.Z))


def as_state(s) -> State:
    if isinstance(s, State):
        return s
    x, y, z = s
    return State(x, y, z)


@dataclass(frozen=True)
class SteadyState:
    label: str
    point: State | None
    defined: bool
    admissible: bool


@dataclass(frozen=True)
class SteadyStateSet:
    entries: tuple[SteadyState, ...]

    def __getitem__(self, label: str) -> SteadyState:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    def __iter__(self) -> Iterator[SteadyState]:
        return iter(self.entries)

    def admissible(self) -> list[SteadyState]:
        return [e for e in self.entries if e.admissible]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues and eigenvectors of a Jacobian.

    ``eigenvectors[i]`` is None where the eigenvector is undefined.
    ``fallback[i]`` marks closed-form vectors that failed the residual check
    and were replaced by the numeric null-space vector.
    """

    eigenvalues: tuple[complex, complex, complex]
    eigenvectors: tuple[np.ndarray | None, ...]
    source: str
    fallback: tuple[bool, bool, bool] = (False, False, False)

    def sorted_eigenvalues(self) -> list[complex]:
        return sorted(self.eigenvalues, key=lambda z: (z.real, z.imag))

    def is_real(self, i: int) -> bool:
        z = self.eigenvalues[i]
        return abs(z.imag) <= REAL_TOL * (1.0 + abs(z.real))

    @property
    def complex_pair(self) -> bool:
        return not all(self.is_real(i) for i in range(3))


# ---------------------------------------------------------------------------
# right-hand side and Jacobian


def _check_finite(s: State | Sequence[float]) -> State:
    try:
        return as_state(s)
    except (TypeError, ValueError) as exc:
        raise DomainError(str(exc)) from exc


def vector_field(p: Params, s) -> np.ndarray:
    """Right-hand side of the system at ``s``."""
    X, Y, Z = _check_finite(s)
    A, B, C = p.A, p.B, p.C
    # X*(1 + C*X - Y) vanishes exactly at Ss2, where Y is the rounded 1 + C
    return np.array([
        X * (1.0 + C * X - Y) - A * Z * X * X,
        -Y + X * Y,
        -B * Z + A * Z * X * X,
    ])


def make_rhs(p: Params):
    """Unchecked array right-hand side ``f(y)`` for the integrators."""
    A, B, C = p.A, p.B, p.C

    def rhs(y: np.ndarray) -> np.ndarray:
        X, Y, Z = y[0], y[1], y[2]
        AZX2 = A * Z * X * X
        return np.array([X * (1.0 + C * X - Y) - AZX2, -Y + X * Y, -B * Z + AZX2])

    return rhs


def jacobian(p: Params, s) -> np.ndarray:
    X, Y, Z = _check_finite(s)
    A, B, C = p.A, p.B, p.C
    return np.array([
        [1.0 - Y + 2.0 * C * X - 2.0 * A * Z * X, -X, -A * X * X],
        [Y, -1.0 + X, 0.0],
        [2.0 * A * Z * X, 0.0, -B + A * X * X],
    ])


def jacobian_fd(p: Params, s, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of :func:`vector_field`."""
    if not h > 0.0:
        raise DomainError(f"finite-difference step must be positive, got {h!r}")
    x = _check_finite(s).as_array()
    J = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[:, j] = (vector_field(p, x + e) - vector_field(p, x - e)) / (2.0 * h)
    return J


# ---------------------------------------------------------------------------
# equilibria


def steady_states(p: Params) -> SteadyStateSet:
    """The five closed-form equilibria.

    Undefined formulas (division by zero) are flagged rather than raised so
    that parameter sweeps never abort.  Ss4 and Ss5 have a negative X
    coordinate and are never admissible.
    """
    A, B, C = p.A, p.B, p.C

    def point(x, y, z):
        # formulas that overflow (e.g. subnormal denominators) count as undefined
        try:
            return State(x, y, z)
        except DomainError:
            return None

    pts: dict[str, State | None] = {
        "Ss1": State(0.0, 0.0, 0.0),
        "Ss2": State(1.0, 1.0 + C, 0.0),
        "Ss4": point(-1.0 / C, 0.0, 0.0) if C > 0.0 else None,
    }
    if A > 0.0 and A * B > 0.0:
        r = math.sqrt(B / A)
        sab = math.sqrt(A * B)
        pts["Ss3"] = point(r, 0.0, (1.0 + C * r) / sab)
        pts["Ss5"] = point(-r, 0.0, (C * r - 1.0) / sab)
    else:
        pts["Ss3"] = pts["Ss5"] = None

    entries = []
    for label in LABELS:
        pt = pts[label]
        defined = pt is not None
        admissible = defined and label not in ("Ss4", "Ss5") and pt.in_P3(0.0)
        entries.append(SteadyState(label, pt, defined, admissible))
    return SteadyStateSet(tuple(entries))


# ---------------------------------------------------------------------------
# spectra


def _csqrt(x: float) -> complex:
    return cmath.sqrt(complex(x))


def _clean(z: complex) -> complex:
    z = complex(z)
    if abs(z.imag) <= REAL_TOL * (1.0 + abs(z.real)):
        return complex(z.real, 0.0)
    return z


def _residual_ok(J: np.ndarray, lam: complex, v: np.ndarray) -> bool:
    scale = max(1.0, np.linalg.norm(J, 2))
    return np.linalg.norm(J @ v - lam * v) <= EIGVEC_RTOL * scale * np.linalg.norm(v)


def _vec(*comps) -> np.ndarray | None:
    try:
        v = np.array([complex(c) for c in comps])
    except ZeroDivisionError:
        return None
    if not np.all(np.isfinite(v)):
        return None
    return v


def _div(a, b):
    if b == 0:
        raise ZeroDivisionError
    return a / b


def spectrum_closed_form(p: Params, label: str) -> Spectrum:
    """Eigenvalues and eigenvectors of the Jacobian at Ss1, Ss2 or Ss3 from
    their closed forms.

    Radicands are always evaluated as complex numbers.  Eigenvectors whose
    formula divides by zero come back as None; vectors that do not satisfy
    the eigen-residual bound are replaced by the numeric null-space vector
    and flagged in ``fallback``.
    """
    A, B, C = p.A, p.B, p.C
    if label == "Ss1":
        lams = (1.0, -1.0, -B)
        vecs = [np.eye(3, dtype=complex)[i] for i in range(3)]
        point = State(0.0, 0.0, 0.0)
    elif label == "Ss2":
        sq = _csqrt((C - 2.0) ** 2 - 8.0)
        lams = (A - B, (C + sq) / 2.0, (C - sq) / 2.0)

        def first():
            return _vec(1.0, _div(C + 1.0, A - B), _div(B + C - A + _div(C + 1.0, B - A), A))

        vecs = [_safe(first), _vec(1.0, (C - sq) / 2.0, 0.0), _vec(1.0, (C + sq) / 2.0, 0.0)]
        point = State(1.0, 1.0 + C, 0.0)
    elif label == "Ss3":
        if A <= 0.0:
            raise DomainError("Ss3 spectrum requires A > 0")
        r = math.sqrt(B / A)
        K = 1.0 + C * r
        sq = _csqrt(1.0 - 8.0 * B * K)
        lams = (r - 1.0, (-1.0 + sq) / 2.0, (-1.0 - sq) / 2.0)

        def first():
            return _vec(1.0, -1.0 - _div(2.0 * math.sqrt(A * B) * K, r - 1.0), _div(2.0 * K, r - 1.0))

        vecs = [
            _safe(first),
            _safe(lambda: _vec(1.0, 0.0, _div(-1.0 - sq, 2.0 * B))),
            _safe(lambda: _vec(1.0, 0.0, _div(-1.0 + sq, 2.0 * B))),
        ]
        # None when B == 0; eigenvalues stay well posed, residual check skipped
        point = steady_states(p)["Ss3"].point
    else:
        raise DomainError(f"closed-form spectrum available for Ss1, Ss2, Ss3 only, got {label!r}")

    lams = tuple(_clean(z) for z in lams)
    fallback = [False, False, False]
    if point is not None:
        J = jacobian(p, point)
        for i, v in enumerate(vecs):
            if v is not None and not _residual_ok(J, lams[i], v):
                vecs[i] = _null_vector(J - lams[i] * np.eye(3), J, lams[i])
                fallback[i] = True
    return Spectrum(lams, tuple(vecs), "closed_form", tuple(fallback))


def _safe(fn):
    try:
        return fn()
    except ZeroDivisionError:
        return None


def _cubic_roots(a2: float, a1: float, a0: float) -> list[complex]:
    """Roots of x**3 + a2*x**2 + a1*x + a0 in closed form.

    Trigonometric form when all three roots are real, Cardano otherwise.
    """
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2 ** 3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    scale = max(abs(p), abs(q) ** (2.0 / 3.0), 1e-300)
    if p == 0.0 and q == 0.0:
        roots = [0.0, 0.0, 0.0]
    elif p != 0.0 and abs(disc) <= 1e-14 * scale ** 3:
        # discriminant zero to rounding: one simple and one double root
        roots = [3.0 * q / p, -1.5 * q / p, -1.5 * q / p]
    elif disc <= 1e-14 * scale ** 3 and p < 0.0:
        # three real roots
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    else:
        sd = math.sqrt(max(disc, 0.0))
        u = np.cbrt(-q / 2.0 + sd)
        v = np.cbrt(-q / 2.0 - sd)
        # cancellation guard: recover the smaller cube root from u*v = -p/3
        if abs(u) >= abs(v) and u != 0.0:
            v = -p / (3.0 * u)
        elif v != 0.0:
            u = -p / (3.0 * v)
        t1 = float(u + v)
        re = -t1 / 2.0
        im = math.sqrt(3.0) / 2.0 * float(u - v)
        roots = [t1, complex(re, im), complex(re, -im)]
    return [complex(r) - shift for r in roots]


def _polish(coeffs: tuple[float, float, float], z: complex) -> complex:
    a2, a1, a0 = coeffs
    for _ in range(3):
        f = ((z + a2) * z + a1) * z + a0
        df = (3.0 * z + 2.0 * a2) * z + a1
        if df == 0:
            break
        step = f / df
        if not cmath.isfinite(step):
            break
        znew = z - step
        fnew = ((znew + a2) * znew + a1) * znew + a0
        if abs(fnew) >= abs(f):
            break
        z = znew
    return z


def eigenvalues_3x3(J: np.ndarray) -> list[complex]:
    """Eigenvalues of a real 3x3 matrix from its characteristic cubic.

    The cubic is formed for ``J - (tr/3) I`` so that clustered eigenvalues
    do not lose their common part to cancellation.
    """
    J = np.asarray(J, dtype=float)
    centre = float(J[0, 0] + J[1, 1] + J[2, 2]) / 3.0
    J = J - centre * np.eye(3)
    tr = J[0, 0] + J[1, 1] + J[2, 2]
    minors = (
        J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
        + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]
    )
    det = (
        J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
        - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
        + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0])
    )
    coeffs = (-float(tr), float(minors), -float(det))
    roots = [_polish(coeffs, z) + centre for z in _cubic_roots(*coeffs)]
    roots = [_clean(z) for z in roots]
    # enforce exact conjugate pairing
    cplx = [z for z in roots if z.imag != 0.0]
    if cplx:
        real = [z for z in roots if z.imag == 0.0]
        if len(cplx) == 2:
            re = 0.5 * (cplx[0].real + cplx[1].real)
            im = 0.5 * (abs(cplx[0].imag) + abs(cplx[1].imag))
            roots = real + [complex(re, im), complex(re, -im)]
    return roots


def _null_vector(M: np.ndarray, J: np.ndarray, lam: complex) -> np.ndarray | None:
    """Null vector of a (numerically) rank-2 matrix via the row-pair cross
    product of largest norm; None when the residual check fails."""
    best, best_norm = None, 0.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        c = np.cross(M[i], M[j])
        n = np.linalg.norm(c)
        if n > best_norm:
            best, best_norm = c, n
    if best is None or best_norm == 0.0:
        return None
    v = best / best_norm
    return v if _residual_ok(J, lam, v) else None


def _null_basis(M: np.ndarray) -> list[np.ndarray]:
    """Orthonormal basis of the null space of a rank <= 1 matrix."""
    k = int(np.argmax(np.linalg.norm(M, axis=1)))
    row = M[k]
    if np.linalg.norm(row) == 0.0:
        return [np.eye(3, dtype=complex)[i] for i in range(3)]
    # row . v == 0  <=>  v is Hermitian-orthogonal to conj(row)
    basis = [np.conj(row) / np.linalg.norm(row)]
    for k in np.argsort(np.abs(basis[0]))[:2]:
        u = np.eye(3, dtype=complex)[k]
        for b in basis:
            u = u - np.vdot(b, u) * b
        basis.append(u / np.linalg.norm(u))
    return basis[1:]


def spectrum_numeric(p: Params, s) -> Spectrum:
    """Spectrum of the analytic Jacobian at ``s`` without any closed forms.

    Eigenvalues come from the characteristic cubic, eigenvectors from the
    null space of ``J - lambda*I``.
    """
    J = jacobian(p, s)
    lams = eigenvalues_3x3(J)
    Jc = J.astype(complex)
    scale = max(1.0, np.linalg.norm(J, 2))
    vecs: list[np.ndarray | None] = []
    for i, lam in enumerate(lams):
        M = Jc - lam * np.eye(3)
        crosses = [np.linalg.norm(np.cross(M[a], M[b])) for a, b in ((0, 1), (0, 2), (1, 2))]
        if max(crosses) > 1e-12 * scale ** 2:
            vecs.append(_null_vector(M, J, lam))
            continue
        # rank <= 1: repeated eigenvalue with a multi-dimensional eigenspace
        twins = sum(1 for k in range(i) if abs(lams[k] - lam) <= 1e-9 * scale)
        basis = [u for u in _null_basis(M) if _residual_ok(J, lam, u)]
        vecs.append(basis[twins] if twins < len(basis) else None)
    return Spectrum(tuple(lams), tuple(vecs), "numeric")


# ---------------------------------------------------------------------------
# slow manifold


@dataclass(frozen=True)
class SlowManifold:
    """The line X = 1, Y + A*Z = 1 + C.

    Every point on it is an equilibrium when A == B.
    """

    params: Params
    base_point: State = field(init=False)
    direction: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.params.A <= 0.0:
            raise DomainError("slow manifold direction requires A > 0")
        A = self.params.A
        d = np.array([0.0, A, -1.0]) / math.hypot(A, 1.0)
        d.flags.writeable = False
        object.__setattr__(self, "base_point", State(1.0, 1.0 + self.params.C, 0.0))
        object.__setattr__(self, "direction", d)

    def point_at(self, t: float) -> np.ndarray:
        return self.base_point.as_array() + t * self.direction

    def axial(self, s) -> float | np.ndarray:
        """Projection parameter along ``direction``; vectorised over rows."""
        r = np.asarray(s if not isinstance(s, State) else s.as_array(), dtype=float)
        return (r - self.base_point.as_array()) @ self.direction

    def offset(self, s) -> np.ndarray:
        """Component of ``s - base_point`` normal to the line."""
        r = np.asarray(s if not isinstance(s, State) else s.as_array(), dtype=float)
        r = r - self.base_point.as_array()
        ax = r @ self.direction
        return r - np.multiply.outer(ax, self.direction)

    def distance(self, s) -> float | np.ndarray:
        return np.linalg.norm(self.offset(s), axis=-1)

    def normal_frame(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal pair spanning the plane normal to the line."""
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.cross(self.direction, e1)
        return e1, e2


def slow_manifold(p: Params) -> SlowManifold:
    return SlowManifold(p)
