"""Single-qubit gates modulo global phase, stored as unit quaternions.

A quaternion ``(w, x, y, z)`` stands for the matrix ``w*I - i*(x*X + y*Y + z*Z)``,
so ``Rz(theta)`` is ``(cos(theta/2), 0, 0, sin(theta/2))`` and the generator
(Pauli) vector of ``U = exp(-i v.sigma)`` is ``v``.  ``q`` and ``-q`` are the
same PSU(2) element; every constructor picks the sign whose first component
of magnitude above ``SIGN_TOL`` is nonnegative.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

SIGN_TOL = 1e-9
HALF_PI = math.pi / 2
BALL_TOL = 1e-9


def canonical_sign(q: np.ndarray) -> np.ndarray:
    """Flip rows of ``q`` (shape ``(..., 4)``) so the first significant component is >= 0."""
    q = np.asarray(q, dtype=float)
    big = np.abs(q) > SIGN_TOL
    first = np.argmax(big, axis=-1)
    lead = np.take_along_axis(q, first[..., None], axis=-1)[..., 0]
    sign = np.where(lead < 0, -1.0, 1.0)
    return q * sign[..., None]


def normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return canonical_sign(q / np.linalg.norm(q, axis=-1, keepdims=True))


def hamilton(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Broadcasting quaternion product; equals the matrix product of the two gates."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def pauli_vectors(q: np.ndarray) -> np.ndarray:
    """Generator vectors ``(theta/2) * n`` for canonical quaternions, shape ``(..., 3)``."""
    q = np.asarray(q, dtype=float)
    # -q is the same element; taking w >= 0 keeps the vector inside the ball
    u = q[..., 1:] * np.where(q[..., 0] < 0, -1.0, 1.0)[..., None]
    s = np.linalg.norm(u, axis=-1)
    half = np.arctan2(s, np.abs(q[..., 0]))
    scale = np.divide(half, s, out=np.ones_like(s), where=s > 0)
    return u * scale[..., None]


def quaternions_from_vectors(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    half = np.linalg.norm(v, axis=-1)
    # sin(h)/h, with the removable singularity at 0
    sinc = np.sinc(half / math.pi)
    q = np.concatenate([np.cos(half)[..., None], v * sinc[..., None]], axis=-1)
    return canonical_sign(q)


@dataclass(frozen=True)
class PauliVector:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if self.norm() > HALF_PI + BALL_TOL:
            raise ValueError(f"Pauli vector norm {self.norm():.12g} exceeds pi/2")

    def norm(self) -> float:
        return math.sqrt(self.alpha**2 + self.beta**2 + self.gamma**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


@dataclass(frozen=True, eq=False)
class GateElement:
    """An element of PSU(2).  Use the classmethods; ``q`` is always canonical."""

    q: tuple

    def __post_init__(self):
        q = normalize(np.asarray(self.q, dtype=float))
        object.__setattr__(self, "q", tuple(float(c) for c in q))

    @classmethod
    def from_quaternion(cls, w, x, y, z) -> "GateElement":
        return cls((w, x, y, z))

    @classmethod
    def identity(cls) -> "GateElement":
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def rz(cls, theta: float) -> "GateElement":
        return cls((math.cos(theta / 2), 0.0, 0.0, math.sin(theta / 2)))

    @classmethod
    def rx(cls, theta: float) -> "GateElement":
        return cls((math.cos(theta / 2), math.sin(theta / 2), 0.0, 0.0))

    @classmethod
    def ry(cls, theta: float) -> "GateElement":
        return cls((math.cos(theta / 2), 0.0, math.sin(theta / 2), 0.0))

    @classmethod
    def from_matrix(cls, u) -> "GateElement":
        """Project a 2x2 unitary (any global phase) onto PSU(2)."""
        u = np.asarray(u, dtype=complex)
        u = u / np.sqrt(np.linalg.det(u))
        w = (u[0, 0] + u[1, 1]).real / 2
        x = -(u[0, 1] + u[1, 0]).imag / 2
        y = (u[1, 0] - u[0, 1]).real / 2
        z = -(u[0, 0] - u[1, 1]).imag / 2
        return cls((w, x, y, z))

    def as_array(self) -> np.ndarray:
        return np.array(self.q)

    def matrix(self) -> np.ndarray:
        w, x, y, z = self.q
        return np.array(
            [[w - 1j * z, -y - 1j * x], [y - 1j * x, w + 1j * z]], dtype=complex
        )

    def __matmul__(self, other: "GateElement") -> "GateElement":
        return compose(self, other)

    def __repr__(self):
        return "GateElement(%.12g, %.12g, %.12g, %.12g)" % self.q


IDENTITY = GateElement.identity()


def compose(a: GateElement, b: GateElement) -> GateElement:
    """Matrix of ``a`` times matrix of ``b``."""
    return GateElement(tuple(hamilton(a.as_array(), b.as_array())))


def compose_all(gates: Iterable[GateElement]) -> GateElement:
    q = np.array(IDENTITY.q)
    for g in gates:
        q = hamilton(q, g.as_array())
    return GateElement(tuple(q))


def adjoint(a: GateElement) -> GateElement:
    w, x, y, z = a.q
    return GateElement((w, -x, -y, -z))


def abs_overlap(a: GateElement, b: GateElement) -> float:
    """``|tr(a^dag b)| / 2``, clipped to [0, 1]."""
    return min(1.0, abs(float(np.dot(a.as_array(), b.as_array()))))


def trace_distance(s: GateElement, g: GateElement) -> float:
    """sqrt((2 - |tr(S^dag G)|)/2), where |tr(S^dag G)| = 2|<q_s, q_g>|.

    Evaluated as ``|q_s - sign * q_g| / sqrt(2)``, which equals the above for unit
    quaternions but keeps full relative precision near zero distance.
    """
    return float(trace_distances(s.as_array()[None], g)[0])


def trace_distances(qs: np.ndarray, g: GateElement | np.ndarray) -> np.ndarray:
    """Vectorized :func:`trace_distance` of many quaternions (rows of ``qs``) to ``g``."""
    qs = np.asarray(qs, dtype=float)
    gq = g.as_array() if isinstance(g, GateElement) else np.asarray(g, dtype=float)
    sign = np.where(qs @ gq < 0, -1.0, 1.0)
    diff = qs - sign[:, None] * gq
    return np.minimum(1.0, np.sqrt(np.einsum("ij,ij->i", diff, diff) / 2))


def to_pauli_vector(g: GateElement) -> PauliVector:
    a, b, c = pauli_vectors(g.as_array())
    return PauliVector(float(a), float(b), float(c))


def from_pauli_vector(v: PauliVector | tuple | np.ndarray) -> GateElement:
    if not isinstance(v, PauliVector):
        v = PauliVector(*(float(c) for c in v))
    return GateElement(tuple(quaternions_from_vectors(v.as_array())))


H = GateElement((0.0, 1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)))
S = GateElement.rz(math.pi / 2)
X = GateElement((0.0, 1.0, 0.0, 0.0))
Y = GateElement((0.0, 0.0, 1.0, 0.0))
Z = GateElement((0.0, 0.0, 0.0, 1.0))
T = GateElement.rz(math.pi / 4)
TDG = GateElement.rz(-math.pi / 4)


def same_element(a: GateElement, b: GateElement, tol: float = 1e-10) -> bool:
    return float(np.max(np.abs(a.as_array() - b.as_array()))) <= tol


def _find(q: np.ndarray, pool: list[np.ndarray], tol: float = 1e-9) -> int:
    for i, p in enumerate(pool):
        if abs(abs(float(np.dot(q, p))) - 1.0) <= tol:
            return i
    return -1


def _clifford_words() -> list[tuple[np.ndarray, str]]:
    """Breadth-first closure of {H, S}, each element tagged with a shortest word."""
    found = [(IDENTITY.as_array(), "I")]
    frontier = list(found)
    gens = [(H.as_array(), "H"), (S.as_array(), "S")]
    while frontier:
        nxt = []
        for q, word in frontier:
            for g, name in gens:
                p = normalize(hamilton(q, g))
                if _find(p, [f[0] for f in found]) >= 0:
                    continue
                item = (p, name if word == "I" else word + "*" + name)
                found.append(item)
                nxt.append(item)
        frontier = nxt
    return found


def clifford_group() -> list[GateElement]:
    """The 24 single-qubit Cliffords modulo phase: closure of {H, S}, sorted by quaternion."""
    qs = [q for q, _ in _clifford_words()]
    # rounding makes the sort key immune to last-bit noise
    qs.sort(key=lambda q: tuple(np.round(q, 9)))
    return [GateElement(tuple(q)) for q in qs]


@dataclass(frozen=True)
class BaseGate:
    id: int
    element: GateElement
    label: str
    order: int
    rotation_index: int | None = None


@dataclass(frozen=True)
class GateSetSpec:
    max_order: int = 3
    include_cliffords: bool = True

    def __post_init__(self):
        if not 3 <= self.max_order <= 8:
            raise ValueError("max_order must lie in 3..8")

    @classmethod
    def named(cls, k: int) -> "GateSetSpec":
        """Set_k, i.e. Cliffords plus T_3 .. T_{k+2}."""
        return cls(max_order=k + 2)


_PAULI_LABELS = {"I": IDENTITY, "X": X, "Y": Y, "Z": Z}
_NAMED_CLIFFORDS = {**_PAULI_LABELS, "H": H, "S": S, "Sdg": adjoint(S)}


def _clifford_label(g: GateElement) -> str:
    for name, e in _NAMED_CLIFFORDS.items():
        if same_element(g, e, 1e-9):
            return name
    words = _clifford_words()
    return words[_find(g.as_array(), [q for q, _ in words])][1]


def clifford_order(g: GateElement) -> int:
    """1 for the Paulis (incl. identity), 2 for the other Cliffords."""
    return 1 if any(same_element(g, p, 1e-9) for p in _PAULI_LABELS.values()) else 2


def hierarchy_rotations(l: int, start_id: int = 0) -> list[BaseGate]:
    """T_l: the ``2**(l-2)`` rotations Rz(pi k / 2**(l-1)) with k odd, |k| < 2**(l-2)."""
    if not 3 <= l <= 8:
        raise ValueError(f"hierarchy order {l} outside 3..8")
    half = 2 ** (l - 2)
    ks = list(range(-(half - 1), half, 2))
    gates = []
    for i, k in enumerate(ks):
        angle = math.pi * k / 2 ** (l - 1)
        gates.append(
            BaseGate(
                id=start_id + i,
                element=GateElement.rz(angle),
                label=f"Rz({k}*pi/{2 ** (l - 1)})",
                order=l,
                rotation_index=k,
            )
        )
    return gates


def build_gate_set(spec: GateSetSpec) -> list[BaseGate]:
    """Cliffords (ids 0..23) followed by T_3, T_4, ... T_L."""
    gates = [
        BaseGate(id=i, element=c, label=_clifford_label(c), order=clifford_order(c))
        for i, c in enumerate(clifford_group())
    ]
    for l in range(3, spec.max_order + 1):
        gates.extend(hierarchy_rotations(l, start_id=len(gates)))
    return gates


def haar_random_gate(rng: np.random.Generator) -> GateElement:
    """Haar sample: four standard normals normalized to a unit quaternion."""
    return GateElement(tuple(rng.standard_normal(4)))


def haar_random_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    return normalize(rng.standard_normal((n, 4)))


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def _eval_angle(text: str) -> float:
    # accepts plain numbers and simple expressions in pi, e.g. "pi/8", "-3*pi/4"
    expr = text.strip().replace("π", "pi")
    if not re.fullmatch(r"[0-9eE.+\-*/() pi]+", expr):
        raise ValueError(f"bad angle {text!r}")
    return float(eval(expr, {"__builtins__": {}}, {"pi": math.pi}))


def _split_product(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        depth += {"(": 1, ")": -1}.get(ch, 0)
        if ch == "*" and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return parts


def parse_gate(text: str) -> GateElement:
    """Parse a gate literal: H, S, Sdg, X, Y, Z, I, T, Tdg, Rz(a), Rx(a), Ry(a), U(w,x,y,z).

    Products are written with a top-level ``*``, e.g. ``"H*T*H"``.
    """
    text = text.strip()
    parts = _split_product(text)
    if len(parts) > 1:
        return compose_all(parse_gate(p) for p in parts)
    named = {
        "I": IDENTITY, "H": H, "S": S, "Sdg": adjoint(S), "X": X, "Y": Y, "Z": Z,
        "T": T, "Tdg": TDG,
    }
    if text in named:
        return named[text]
    m = re.fullmatch(r"R([xyz])\((.+)\)", text)
    if m:
        angle = _eval_angle(m.group(2))
        return {"x": GateElement.rx, "y": GateElement.ry, "z": GateElement.rz}[m.group(1)](angle)
    m = re.fullmatch(r"U\((.+)\)", text)
    if m:
        comps = [float(c) for c in m.group(1).split(",")]
        if len(comps) != 4:
            raise ValueError(f"U() needs four components: {text!r}")
        return GateElement(tuple(comps))
    raise ValueError(f"unknown gate literal {text!r}")
