"""Polyhedral ambiguity sets over scenario probabilities."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import lp
from .scenarios import SIMPLEX_TOL

MAX_ENUMERATE_M = 8


class AmbiguityError(ValueError):
    """Raised for malformed or empty ambiguity sets."""


def _mat(a, m: int, name: str) -> np.ndarray:
    if a is None:
        return np.zeros((0, m))
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((0, m))
    a = np.atleast_2d(a)
    if a.shape[1] != m:
        raise AmbiguityError(f"{name} has {a.shape[1]} columns, expected m = {m}")
    return a


@dataclass(frozen=True)
class AmbiguitySet:
    """``{p in simplex : A0 p = d0, A1 p <= d1}``; nonemptiness is checked on construction."""

    m: int
    A0: np.ndarray = None
    d0: np.ndarray = None
    A1: np.ndarray = None
    d1: np.ndarray = None

    def __post_init__(self):
        m = int(self.m)
        if m < 1:
            raise AmbiguityError("m must be positive")
        A0, A1 = _mat(self.A0, m, "A0"), _mat(self.A1, m, "A1")
        d0 = np.zeros(0) if self.d0 is None else np.asarray(self.d0, float).reshape(-1)
        d1 = np.zeros(0) if self.d1 is None else np.asarray(self.d1, float).reshape(-1)
        if d0.shape[0] != A0.shape[0] or d1.shape[0] != A1.shape[0]:
            raise AmbiguityError("right-hand sides do not match the constraint row counts")
        for arr in (A0, d0, A1, d1):
            if not np.all(np.isfinite(arr)):
                raise AmbiguityError("ambiguity data must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "A0", A0)
        object.__setattr__(self, "d0", d0)
        object.__setattr__(self, "A1", A1)
        object.__setattr__(self, "d1", d1)
        if not lp.check_feasibility(self.feasibility_problem(np.zeros(m))):
            raise AmbiguityError("ambiguity set is empty")

    @property
    def m0(self) -> int:
        return self.A0.shape[0]

    @property
    def m1(self) -> int:
        return self.A1.shape[0]

    def feasibility_problem(self, objective) -> lp.LpProblem:
        """LP over ``p`` with this set as the feasible region (maximize ``objective @ p``)."""
        A_eq = np.vstack([np.ones((1, self.m)), self.A0])
        b_eq = np.concatenate([[1.0], self.d0])
        return lp.LpProblem(objective, A_eq=A_eq, b_eq=b_eq, A_ub=self.A1, b_ub=self.d1)


@dataclass(frozen=True)
class BoxSpec:
    """Per-scenario probability box ``|p_j - nominal_j| <= radius_j``.

    Give either absolute ``radii`` or a relative ``gamma`` (radius = gamma * nominal).
    """

    nominal: np.ndarray
    radii: np.ndarray | None = None
    gamma: float | None = None

    def __post_init__(self):
        p = np.asarray(self.nominal, dtype=float).reshape(-1)
        if p.size == 0 or np.any(p < -SIMPLEX_TOL) or abs(p.sum() - 1.0) > SIMPLEX_TOL:
            raise AmbiguityError("nominal is not a probability vector")
        if (self.radii is None) == (self.gamma is None):
            raise AmbiguityError("give exactly one of radii or gamma")
        if self.gamma is not None:
            g = float(self.gamma)
            if not 0.0 <= g < 1.0:
                raise AmbiguityError("gamma must lie in [0, 1)")
            rho = g * p
        else:
            rho = np.broadcast_to(np.asarray(self.radii, float), p.shape).copy()
            if np.any(rho < 0) or not np.all(np.isfinite(rho)):
                raise AmbiguityError("radii must be finite and nonnegative")
        object.__setattr__(self, "nominal", p)
        object.__setattr__(self, "radii", rho)


def box_to_polyhedron(spec: BoxSpec) -> AmbiguitySet:
    m = spec.nominal.shape[0]
    A1 = np.vstack([np.eye(m), -np.eye(m)])
    d1 = np.concatenate([spec.radii + spec.nominal, spec.radii - spec.nominal])
    return AmbiguitySet(m, A1=A1, d1=d1)


def box(nominal, gamma: float | None = None, radii=None) -> AmbiguitySet:
    """Shorthand for ``box_to_polyhedron(BoxSpec(...))``."""
    return box_to_polyhedron(BoxSpec(np.asarray(nominal, float), radii=radii, gamma=gamma))


def unconstrained(m: int) -> AmbiguitySet:
    """The whole simplex."""
    return AmbiguitySet(m)


def contains(aset: AmbiguitySet, p, tol: float = 1e-9) -> bool:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != aset.m:
        raise AmbiguityError(f"p has length {p.shape[0]}, expected {aset.m}")
    if np.any(p < -tol) or abs(p.sum() - 1.0) > tol:
        return False
    if aset.m0 and np.max(np.abs(aset.A0 @ p - aset.d0)) > tol:
        return False
    if aset.m1 and np.max(aset.A1 @ p - aset.d1) > tol:
        return False
    return True


def vertex_enumerate(aset: AmbiguitySet, tol: float = 1e-9) -> list[np.ndarray]:
    """All vertices of the set, by brute force over active-constraint choices.

    Intended as a test oracle; restricted to ``m <= 8``.
    """
    m = aset.m
    if m > MAX_ENUMERATE_M:
        raise AmbiguityError(f"vertex enumeration is limited to m <= {MAX_ENUMERATE_M}")
    E = np.vstack([np.ones((1, m)), aset.A0])
    e = np.concatenate([[1.0], aset.d0])
    G = np.vstack([-np.eye(m), aset.A1])
    g = np.concatenate([np.zeros(m), aset.d1])
    # equality rows may be dependent; keep an independent subset
    rank = np.linalg.matrix_rank(E)
    keep: list[int] = []
    for i in range(E.shape[0]):
        if np.linalg.matrix_rank(E[keep + [i]]) > len(keep):
            keep.append(i)
    E, e = E[keep], e[keep]
    need = m - rank
    found: list[np.ndarray] = []
    combos = itertools.combinations(range(G.shape[0]), need)
    while True:
        chunk = list(itertools.islice(combos, 20000))
        if not chunk:
            break
        idx = np.array(chunk, dtype=int).reshape(len(chunk), need)
        M = np.concatenate([np.broadcast_to(E, (len(chunk),) + E.shape), G[idx]], axis=1)
        r = np.concatenate([np.broadcast_to(e, (len(chunk), e.shape[0])), g[idx]], axis=1)
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-12
        if not np.any(ok):
            continue
        pts = np.linalg.solve(M[ok], r[ok][..., None])[..., 0]
        for pt in pts:
            if contains(aset, pt, tol):
                found.append(pt)
    if not found:
        raise AmbiguityError("ambiguity set is empty")
    verts: list[np.ndarray] = []
    for pt in found:
        if not any(np.max(np.abs(pt - v)) <= 1e-9 for v in verts):
            verts.append(pt)
    verts.sort(key=lambda v: tuple(-v))
    return verts


def from_json(obj: dict, nominal=None) -> AmbiguitySet:
    """Parse ``{"type": "box", ...}`` or ``{"type": "polyhedron", ...}``.

    A box without its own ``nominal`` uses the ``nominal`` argument.
    """
    kind = obj.get("type")
    if kind == "box":
        p = obj.get("nominal", nominal)
        if p is None:
            raise AmbiguityError("box ambiguity needs a nominal distribution")
        if "gamma" in obj and "radii" in obj:
            raise AmbiguityError("give exactly one of radii or gamma")
        if "gamma" in obj:
            return box(p, gamma=float(obj["gamma"]))
        if "radii" in obj:
            return box(p, radii=obj["radii"])
        raise AmbiguityError("box ambiguity needs gamma or radii")
    if kind == "polyhedron":
        A0 = obj.get("A0") or None
        A1 = obj.get("A1") or None
        m = obj.get("m")
        if m is None:
            for a in (A0, A1):
                if a:
                    m = len(a[0])
                    break
        if m is None and nominal is not None:
            m = len(nominal)
        if m is None:
            raise AmbiguityError("cannot infer m for a polyhedron with no rows")
        return AmbiguitySet(int(m), A0, obj.get("d0"), A1, obj.get("d1"))
    raise AmbiguityError(f"unknown ambiguity type {kind!r}")


def to_json(aset: AmbiguitySet) -> dict:
    return {
        "type": "polyhedron",
        "m": aset.m,
        "A0": aset.A0.tolist(),
        "d0": aset.d0.tolist(),
        "A1": aset.A1.tolist(),
        "d1": aset.d1.tolist(),
    }
